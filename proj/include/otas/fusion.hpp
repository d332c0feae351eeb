#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "otas/alignment.hpp"
#include "otas/geometry.hpp"
#include "otas/tensor.hpp"

namespace otas {

/// Clustering input in spatial mode: [vision features | standardized x, y, z],
/// one row per (view, cell) that has geometry.
struct SpatialMatrix {
  TokenMatrix matrix;
  std::vector<std::pair<std::size_t, std::size_t>> origin;  // (view, cell) of each row
};

SpatialMatrix build_spatial_features(std::span<const TokenGrid> vision, const GlobalGeometry& geometry);

/// Global points paired with their pooled language features.
struct SemanticCloud {
  std::size_t channels = 0;
  Points points;
  std::vector<float> features;  // points.size() x channels
  std::vector<std::size_t> view_of_point;

  std::size_t size() const { return points.size(); }
  std::span<const float> feature(std::size_t i) const { return {features.data() + i * channels, channels}; }

  void append(const SemanticCloud& other);
};

SemanticCloud project_pooled_to_points(std::span<const PooledGrid> pooled, const GlobalGeometry& geometry);

struct VoxelIndex {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;
  auto operator<=>(const VoxelIndex&) const = default;
};

VoxelIndex voxel_of(const Eigen::Vector3d& p, double voxel_size);

struct VoxelCell {
  VoxelIndex index;
  std::vector<float> feature;  // mean of member features, re-normalized to unit length
  std::size_t count = 0;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
};

/// Language-queryable voxel map. Cells are sorted by index and immutable once built.
struct VoxelGrid {
  double voxel_size = 0.0;
  std::size_t channels = 0;
  std::vector<VoxelCell> cells;

  const VoxelCell* find(const VoxelIndex& index) const;
  std::size_t point_count() const;
};

/// Groups points by floor(p / v) per axis, averages positions and features.
///
/// Members of a voxel are summed in a canonical order, so the result is bitwise
/// independent of the row order of `cloud`.
VoxelGrid voxel_downsample(const SemanticCloud& cloud, double voxel_size);

struct QueryResult {
  std::vector<float> raw;         // combined similarity per voxel
  std::vector<float> similarity;  // min-max normalized over the grid
  std::vector<std::uint8_t> labels;
};

QueryResult query_grid(const VoxelGrid& grid, const PromptSet& prompts, float tau);

}  // namespace otas
