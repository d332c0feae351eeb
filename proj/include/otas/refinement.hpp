#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "otas/alignment.hpp"
#include "otas/tensor.hpp"

namespace otas {

/// Pixel-level binary mask, row-major, values 0 or 1.
struct BinaryMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(std::size_t h, std::size_t w) : height(h), width(w), data(h * w, 0) {}
  std::size_t count() const;
};

/// The input image, passed by reference; only its size is needed on the default path.
struct ImageRef {
  std::filesystem::path path;
  std::size_t height = 0;
  std::size_t width = 0;
};

/// External mask refiner: (image, full-resolution similarity map) -> binary mask.
///
/// Calls through run() are serialized per instance unless the hook reports itself
/// reentrant. Any failure, including a mask of the wrong size, is reported as a
/// RefinerError carrying the hook identifier.
class RefinerHook {
 public:
  explicit RefinerHook(std::string identifier, bool reentrant = false)
      : identifier_(std::move(identifier)), reentrant_(reentrant) {}
  virtual ~RefinerHook() = default;
  RefinerHook(const RefinerHook&) = delete;
  RefinerHook& operator=(const RefinerHook&) = delete;

  const std::string& identifier() const { return identifier_; }
  bool reentrant() const { return reentrant_; }

  BinaryMask run(const ImageRef& image, const FeatureMap& similarity);

 protected:
  virtual BinaryMask refine_mask(const ImageRef& image, const FeatureMap& similarity) = 0;

 private:
  std::string identifier_;
  bool reentrant_;
  std::mutex mutex_;
};

/// Hook backed by a callable; mostly useful for tests and embedding.
class FunctionRefiner : public RefinerHook {
 public:
  using Fn = std::function<BinaryMask(const ImageRef&, const FeatureMap&)>;
  FunctionRefiner(std::string identifier, Fn fn, bool reentrant = false)
      : RefinerHook(std::move(identifier), reentrant), fn_(std::move(fn)) {}

 protected:
  BinaryMask refine_mask(const ImageRef& image, const FeatureMap& similarity) override { return fn_(image, similarity); }

 private:
  Fn fn_;
};

/// Runs an external program as `command... <image> <similarity.otf> <mask.png>`.
///
/// The similarity file is a 2-D OTF tensor of shape (H, W) with values in [0, 1].
/// The program must exit with status 0 after writing an 8-bit PNG of size W x H;
/// nonzero pixels are positive.
class SubprocessRefiner : public RefinerHook {
 public:
  explicit SubprocessRefiner(std::vector<std::string> command);
  /// Splits a command line on whitespace.
  static std::vector<std::string> split_command(const std::string& line);

 protected:
  BinaryMask refine_mask(const ImageRef& image, const FeatureMap& similarity) override;

 private:
  std::vector<std::string> command_;
};

/// Bilinear (align-corners) upsampling of a normalized similarity map to H x W, one channel.
FeatureMap upsample_similarity(const SimilarityMap& s, std::size_t height, std::size_t width);

/// 1 where value >= tau. tau must lie in [0, 1]; the input must be single-channel.
BinaryMask threshold_mask(const FeatureMap& values, float tau);
BinaryMask threshold_mask(const SimilarityMap& s, float tau);

/// Upsamples `s` to the image size, then either delegates to `hook` or thresholds at tau.
/// A failing hook is reported, never silently replaced by thresholding.
BinaryMask refine(const ImageRef& image, const SimilarityMap& s, RefinerHook* hook, float tau);

}  // namespace otas
