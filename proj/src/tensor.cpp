#include "otas/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "otas/error.hpp"

namespace otas {
namespace {

void require_finite(std::span<const float> values, const char* what) {
  for (float v : values) {
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + " contains non-finite values");
  }
}

// Source position for output index i under align-corners: i * (n_src - 1) / (n_dst - 1),
// returned as integer part plus fractional weight. Integer arithmetic keeps identity
// resizes exact.
struct SourcePos {
  std::size_t index;
  std::size_t next;
  float frac;
};

SourcePos source_position(std::size_t i, std::size_t n_src, std::size_t n_dst) {
  if (n_dst <= 1 || n_src <= 1) return {0, 0, 0.0f};
  const std::uint64_t num = static_cast<std::uint64_t>(i) * (n_src - 1);
  const std::uint64_t den = n_dst - 1;
  const std::size_t idx = static_cast<std::size_t>(num / den);
  const std::size_t next = idx + 1 < n_src ? idx + 1 : idx;
  return {idx, next, static_cast<float>(static_cast<double>(num % den) / static_cast<double>(den))};
}

std::size_t nearest_index(std::size_t i, std::size_t n_src, std::size_t n_dst) {
  if (n_dst <= 1 || n_src <= 1) return 0;
  // ceil(num / den - 1/2) = ceil((2 num - den) / (2 den)); ties go to the smaller index.
  const std::int64_t num = static_cast<std::int64_t>(i) * static_cast<std::int64_t>(n_src - 1);
  const std::int64_t den = static_cast<std::int64_t>(n_dst - 1);
  const std::int64_t a = 2 * num - den;
  const std::int64_t b = 2 * den;
  if (a <= 0) return 0;
  return static_cast<std::size_t>((a + b - 1) / b);
}

void check_resize_args(const FeatureMap& src, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw ValidationError("resize target size must be positive");
  if (src.height == 0 || src.width == 0 || src.channels == 0) {
    throw ValidationError("cannot resize an empty feature map");
  }
}

}  // namespace

FeatureMap::FeatureMap(std::size_t h, std::size_t w, std::size_t c)
    : height(h), width(w), channels(c), data(h * w * c, 0.0f) {}

FeatureMap::FeatureMap(std::size_t h, std::size_t w, std::size_t c, std::vector<float> values)
    : height(h), width(w), channels(c), data(std::move(values)) {
  if (data.size() != h * w * c) {
    throw ValidationError("feature map data length " + std::to_string(data.size()) +
                          " does not match shape " + std::to_string(h) + "x" +
                          std::to_string(w) + "x" + std::to_string(c));
  }
  require_finite(data, "feature map");
}

TokenMatrix::TokenMatrix(std::size_t r, std::size_t c, std::vector<float> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != r * c) throw ValidationError("token matrix data length does not match shape");
}

void l2_normalize_inplace(std::span<float> vector) {
  double sq = 0.0;
  for (float v : vector) sq += static_cast<double>(v) * v;
  const double norm = std::sqrt(sq);
  if (norm < kZeroNorm) return;
  for (float& v : vector) v = static_cast<float>(v / norm);
}

TokenMatrix l2_normalize(TokenMatrix vectors) {
  require_finite(vectors.data, "token matrix");
  for (std::size_t r = 0; r < vectors.rows; ++r) l2_normalize_inplace(vectors.row(r));
  return vectors;
}

TokenGrid l2_normalize(TokenGrid grid) {
  require_finite(grid.data, "token grid");
  for (std::size_t i = 0; i < grid.cells(); ++i) l2_normalize_inplace(grid.cell(i));
  grid.normalized = true;
  return grid;
}

FeatureMap resize_bilinear(const FeatureMap& src, std::size_t out_h, std::size_t out_w) {
  check_resize_args(src, out_h, out_w);
  FeatureMap out(out_h, out_w, src.channels);
  const std::size_t c = src.channels;
  std::vector<SourcePos> xs(out_w);
  for (std::size_t x = 0; x < out_w; ++x) xs[x] = source_position(x, src.width, out_w);

  for (std::size_t y = 0; y < out_h; ++y) {
    const SourcePos sy = source_position(y, src.height, out_h);
    for (std::size_t x = 0; x < out_w; ++x) {
      const SourcePos& sx = xs[x];
      auto p00 = src.cell(sy.index, sx.index);
      auto p01 = src.cell(sy.index, sx.next);
      auto p10 = src.cell(sy.next, sx.index);
      auto p11 = src.cell(sy.next, sx.next);
      auto dst = out.cell(y, x);
      for (std::size_t ch = 0; ch < c; ++ch) {
        // Lerp form a + t (b - a) keeps constant fields exact.
        const float top = p00[ch] + sx.frac * (p01[ch] - p00[ch]);
        const float bottom = p10[ch] + sx.frac * (p11[ch] - p10[ch]);
        dst[ch] = top + sy.frac * (bottom - top);
      }
    }
  }
  return out;
}

TokenGrid resize_bilinear(const FeatureMap& src, std::size_t d) {
  check_resize_args(src, d, d);
  FeatureMap resized = resize_bilinear(src, d, d);
  TokenGrid grid;
  grid.d = d;
  grid.channels = src.channels;
  grid.data = std::move(resized.data);
  return grid;
}

TokenGrid resize_nearest(const FeatureMap& src, std::size_t d) {
  check_resize_args(src, d, d);
  TokenGrid grid(d, src.channels);
  for (std::size_t y = 0; y < d; ++y) {
    const std::size_t sy = nearest_index(y, src.height, d);
    for (std::size_t x = 0; x < d; ++x) {
      const std::size_t sx = nearest_index(x, src.width, d);
      auto from = src.cell(sy, sx);
      auto to = grid.cell(y * d + x);
      std::copy(from.begin(), from.end(), to.begin());
    }
  }
  return grid;
}

TokenMatrix flatten(const TokenGrid& grid) {
  TokenMatrix m(grid.cells(), grid.channels, grid.data);
  return m;
}

TokenMatrix flatten(std::span<const TokenGrid> grids) {
  if (grids.empty()) return {};
  const std::size_t d = grids.front().d;
  const std::size_t c = grids.front().channels;
  TokenMatrix m;
  m.rows = grids.size() * d * d;
  m.cols = c;
  m.views = grids.size();
  m.data.reserve(m.rows * c);
  for (const TokenGrid& g : grids) {
    if (g.d != d || g.channels != c) throw ValidationError("stacked token grids differ in shape");
    m.data.insert(m.data.end(), g.data.begin(), g.data.end());
  }
  return m;
}

TokenGrid unflatten(const TokenMatrix& matrix, std::size_t d, std::size_t view_index) {
  const std::size_t cells = d * d;
  if ((view_index + 1) * cells > matrix.rows) {
    throw ValidationError("token matrix has too few rows for view " + std::to_string(view_index));
  }
  TokenGrid grid(d, matrix.cols);
  const auto first = matrix.data.begin() + static_cast<std::ptrdiff_t>(view_index * cells * matrix.cols);
  std::copy(first, first + static_cast<std::ptrdiff_t>(cells * matrix.cols), grid.data.begin());
  return grid;
}

}  // namespace otas
