#include "otas/refinement.hpp"

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

#include "otas/error.hpp"
#include "otas/otf.hpp"
#include "otas/png_io.hpp"

namespace otas {
namespace {

void check_tau(float tau) {
  if (!(tau >= 0.0f && tau <= 1.0f)) throw ValidationError("threshold tau=" + std::to_string(tau) + " outside [0, 1]");
}

// Removes its directory on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("otas-refiner-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

int run_process(const std::vector<std::string>& argv) {
  std::vector<char*> args;
  args.reserve(argv.size() + 1);
  for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) return -1;
  if (pid == 0) {
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  int status = 0;
  if (::waitpid(pid, &status, 0) < 0) return -1;
  if (!WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

}  // namespace

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::accumulate(data.begin(), data.end(), std::size_t{0}));
}

BinaryMask RefinerHook::run(const ImageRef& image, const FeatureMap& similarity) {
  std::unique_lock<std::mutex> lock(mutex_, std::defer_lock);
  if (!reentrant_) lock.lock();
  BinaryMask mask;
  try {
    mask = refine_mask(image, similarity);
  } catch (const RefinerError&) {
    throw;
  } catch (const std::exception& e) {
    throw RefinerError(identifier_, e.what());
  }
  if (mask.height != image.height || mask.width != image.width || mask.data.size() != image.height * image.width) {
    throw RefinerError(identifier_, "returned a " + std::to_string(mask.height) + "x" + std::to_string(mask.width) +
                                        " mask for a " + std::to_string(image.height) + "x" +
                                        std::to_string(image.width) + " image");
  }
  return mask;
}

std::vector<std::string> SubprocessRefiner::split_command(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> parts;
  for (std::string token; in >> token;) parts.push_back(token);
  return parts;
}

SubprocessRefiner::SubprocessRefiner(std::vector<std::string> command)
    : RefinerHook(command.empty() ? std::string("<empty>") : command.front()), command_(std::move(command)) {
  if (command_.empty()) throw ValidationError("refiner command is empty");
}

BinaryMask SubprocessRefiner::refine_mask(const ImageRef& image, const FeatureMap& similarity) {
  ScratchDir scratch;
  const auto sim_path = scratch.path() / "similarity.otf";
  const auto mask_path = scratch.path() / "mask.png";
  const std::uint32_t shape[2] = {static_cast<std::uint32_t>(similarity.height),
                                  static_cast<std::uint32_t>(similarity.width)};
  write_otf(sim_path, shape, similarity.data);

  std::vector<std::string> argv = command_;
  argv.push_back(image.path.string());
  argv.push_back(sim_path.string());
  argv.push_back(mask_path.string());
  const int status = run_process(argv);
  if (status != 0) throw RefinerError(identifier(), "exited with status " + std::to_string(status));
  if (!std::filesystem::exists(mask_path)) throw RefinerError(identifier(), "did not write a mask");
  return read_png_mask(mask_path);
}

FeatureMap upsample_similarity(const SimilarityMap& s, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw ValidationError("upsampling target size must be positive");
  if (s.data.size() != s.d * s.d || s.d == 0) throw ValidationError("similarity map is empty or malformed");
  FeatureMap coarse(s.d, s.d, 1, s.data);
  return resize_bilinear(coarse, height, width);
}

BinaryMask threshold_mask(const FeatureMap& values, float tau) {
  check_tau(tau);
  if (values.channels != 1) throw ValidationError("thresholding needs a single-channel map");
  BinaryMask mask(values.height, values.width);
  for (std::size_t i = 0; i < mask.data.size(); ++i) mask.data[i] = values.data[i] >= tau ? 1 : 0;
  return mask;
}

BinaryMask threshold_mask(const SimilarityMap& s, float tau) {
  return threshold_mask(FeatureMap(s.d, s.d, 1, s.data), tau);
}

BinaryMask refine(const ImageRef& image, const SimilarityMap& s, RefinerHook* hook, float tau) {
  check_tau(tau);
  if (image.height == 0 || image.width == 0) throw ValidationError("image size unknown");
  const FeatureMap upsampled = upsample_similarity(s, image.height, image.width);
  if (hook != nullptr) return hook->run(image, upsampled);
  return threshold_mask(upsampled, tau);
}

}  // namespace otas
