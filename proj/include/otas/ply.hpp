#pragma once

// Binary little-endian PLY export. Every file has exactly this header:
//
//   ply
//   format binary_little_endian 1.0
//   element vertex <N>
//   property float x
//   property float y
//   property float z
//   property uchar red
//   property uchar green
//   property uchar blue
//   end_header
//
// followed by N records of 15 bytes (3 x float32, 3 x uint8).

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "otas/geometry.hpp"

namespace otas {

using Rgb = std::array<std::uint8_t, 3>;

enum class PlyColoring { kRgb, kSimilarity, kLabel };

/// Fixed 5-stop colormap for values in [0, 1] (dark purple -> blue -> teal -> green -> yellow),
/// linearly interpolated; values outside [0, 1] are clamped.
Rgb similarity_color(float value);

/// Label palette: label 0 is gray, positive labels cycle through a fixed list of hues.
Rgb label_color(int label);

/// Pseudo-colors from the three leading principal axes of the features, each
/// rescaled to [0, 255]. Falls back to mid-gray when there are too few rows.
std::vector<Rgb> feature_colors(std::span<const float> features, std::size_t channels);

void write_ply(const std::filesystem::path& path, std::span<const Eigen::Vector3d> points, std::span<const Rgb> colors);

}  // namespace otas
