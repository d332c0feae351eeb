#include "otas/ply.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <string>

#include "otas/error.hpp"
#include "otas/reduction.hpp"

namespace otas {
namespace {

constexpr std::array<Rgb, 5> kSimilarityStops = {{
    {68, 1, 84},
    {59, 82, 139},
    {33, 145, 140},
    {94, 201, 98},
    {253, 231, 37},
}};

constexpr std::array<Rgb, 8> kLabelPalette = {{
    {230, 57, 70},
    {42, 157, 143},
    {69, 123, 157},
    {244, 162, 97},
    {131, 56, 236},
    {255, 190, 11},
    {58, 134, 255},
    {106, 153, 78},
}};

void put_f32(std::vector<char>& out, float v) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

}  // namespace

Rgb similarity_color(float value) {
  const double v = std::clamp(static_cast<double>(std::isfinite(value) ? value : 0.0f), 0.0, 1.0);
  const double scaled = v * static_cast<double>(kSimilarityStops.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(scaled), kSimilarityStops.size() - 2);
  const double t = scaled - static_cast<double>(i);
  Rgb out{};
  for (int c = 0; c < 3; ++c) {
    const double a = kSimilarityStops[i][c];
    const double b = kSimilarityStops[i + 1][c];
    out[c] = static_cast<std::uint8_t>(std::lround(a + t * (b - a)));
  }
  return out;
}

Rgb label_color(int label) {
  if (label <= 0) return {128, 128, 128};
  return kLabelPalette[static_cast<std::size_t>(label - 1) % kLabelPalette.size()];
}

std::vector<Rgb> feature_colors(std::span<const float> features, std::size_t channels) {
  const std::size_t rows = channels ? features.size() / channels : 0;
  std::vector<Rgb> colors(rows, Rgb{128, 128, 128});
  if (rows < 4 || channels < 3) return colors;
  const TokenMatrix m(rows, channels, {features.begin(), features.end()});
  const TokenMatrix reduced = pca_transform(pca_fit(m, 3), m);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    float lo = reduced.row(0)[axis], hi = lo;
    for (std::size_t r = 1; r < rows; ++r) {
      lo = std::min(lo, reduced.row(r)[axis]);
      hi = std::max(hi, reduced.row(r)[axis]);
    }
    const double range = hi - lo;
    for (std::size_t r = 0; r < rows; ++r) {
      const double t = range > 0.0 ? (reduced.row(r)[axis] - lo) / range : 0.5;
      colors[r][axis] = static_cast<std::uint8_t>(std::lround(255.0 * t));
    }
  }
  return colors;
}

void write_ply(const std::filesystem::path& path, std::span<const Eigen::Vector3d> points, std::span<const Rgb> colors) {
  if (points.empty()) throw ValidationError("refusing to write an empty point cloud to " + path.string());
  if (colors.size() != points.size()) throw ValidationError("one color per point is required");
  const std::string header = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(points.size()) +
                             "\nproperty float x\nproperty float y\nproperty float z\n"
                             "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  std::vector<char> body;
  body.reserve(points.size() * 15);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int k = 0; k < 3; ++k) put_f32(body, static_cast<float>(points[i][k]));
    for (int k = 0; k < 3; ++k) body.push_back(static_cast<char>(colors[i][k]));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace otas
