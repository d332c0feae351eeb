#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace otas {

/// Encoder output on its native patch grid, row-major (height, width, channels).
struct FeatureMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(std::size_t h, std::size_t w, std::size_t c);
  /// Throws ValidationError on a length mismatch or non-finite values.
  FeatureMap(std::size_t h, std::size_t w, std::size_t c, std::vector<float> values);

  bool empty() const { return data.empty(); }
  std::span<float> cell(std::size_t y, std::size_t x) {
    return {data.data() + (y * width + x) * channels, channels};
  }
  std::span<const float> cell(std::size_t y, std::size_t x) const {
    return {data.data() + (y * width + x) * channels, channels};
  }
};

/// Square d x d token grid at the shared resolution.
struct TokenGrid {
  std::size_t d = 0;
  std::size_t channels = 0;
  bool normalized = false;
  std::vector<float> data;

  TokenGrid() = default;
  TokenGrid(std::size_t side, std::size_t c) : d(side), channels(c), data(side * side * c, 0.0f) {}

  std::size_t cells() const { return d * d; }
  std::span<float> cell(std::size_t index) { return {data.data() + index * channels, channels}; }
  std::span<const float> cell(std::size_t index) const {
    return {data.data() + index * channels, channels};
  }
  std::span<const float> cell(std::size_t y, std::size_t x) const { return cell(y * d + x); }
};

/// Row-major matrix of token vectors; rows = views * d * d for stacked grids.
struct TokenMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t views = 1;
  std::vector<float> data;

  TokenMatrix() = default;
  TokenMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}
  TokenMatrix(std::size_t r, std::size_t c, std::vector<float> values);

  std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

// Rows whose L2 norm is below this pass through normalization unchanged.
inline constexpr double kZeroNorm = 1e-12;

/// Scales every row to unit L2 norm. Throws ValidationError on non-finite input.
TokenMatrix l2_normalize(TokenMatrix vectors);
TokenGrid l2_normalize(TokenGrid grid);
void l2_normalize_inplace(std::span<float> vector);

// Resampling uses the align-corners convention: output index i maps to source
// coordinate i * (src - 1) / (dst - 1), so corner cells coincide exactly.
FeatureMap resize_bilinear(const FeatureMap& src, std::size_t out_height, std::size_t out_width);
TokenGrid resize_bilinear(const FeatureMap& src, std::size_t d);

/// Nearest source cell under the same mapping; exact halves round toward the smaller index.
TokenGrid resize_nearest(const FeatureMap& src, std::size_t d);

/// Row r holds cell (r / d, r % d).
TokenMatrix flatten(const TokenGrid& grid);
/// Stacks several grids view-major: row = view * d * d + cell.
TokenMatrix flatten(std::span<const TokenGrid> grids);
TokenGrid unflatten(const TokenMatrix& matrix, std::size_t d, std::size_t view_index = 0);

}  // namespace otas
