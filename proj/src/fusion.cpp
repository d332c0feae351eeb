#include "otas/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "otas/error.hpp"

namespace otas {

SpatialMatrix build_spatial_features(std::span<const TokenGrid> vision, const GlobalGeometry& geometry) {
  if (vision.size() != geometry.maps.size()) throw ValidationError("one vision grid per view is required");
  if (vision.empty()) throw EmptyGeometryError("no views");
  const std::size_t channels = vision.front().channels;
  const std::size_t cells = vision.front().cells();
  for (const TokenGrid& g : vision) {
    if (g.channels != channels || g.cells() != cells) throw ValidationError("vision grids differ in shape");
  }

  SpatialMatrix out;
  for (std::size_t v = 0; v < vision.size(); ++v) {
    if (geometry.maps[v].size() != cells) throw IntegrityError("patch-point map does not match grid size");
    for (std::size_t c = 0; c < cells; ++c) {
      if (geometry.maps[v][c]) out.origin.emplace_back(v, c);
    }
  }
  if (out.origin.empty()) throw EmptyGeometryError("no cell of any view has geometry");

  const std::size_t rows = out.origin.size();
  std::vector<Eigen::Vector3d> coords(rows);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto [v, c] = out.origin[r];
    const std::size_t p = *geometry.maps[v][c];
    if (p >= geometry.points.size()) throw IntegrityError("patch-point map refers past the point cloud");
    coords[r] = geometry.points[p];
    mean += coords[r];
  }
  mean /= static_cast<double>(rows);
  Eigen::Vector3d var = Eigen::Vector3d::Zero();
  for (const Eigen::Vector3d& p : coords) var += (p - mean).cwiseAbs2();
  var /= static_cast<double>(rows);

  out.matrix = TokenMatrix(rows, channels + 3);
  out.matrix.views = vision.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto [v, c] = out.origin[r];
    auto feature = vision[v].cell(c);
    auto dst = out.matrix.row(r);
    std::copy(feature.begin(), feature.end(), dst.begin());
    for (int axis = 0; axis < 3; ++axis) {
      const double centered = coords[r][axis] - mean[axis];
      // A flat axis carries no information; leave it centered at zero.
      const double scaled = var[axis] > 0.0 ? centered / std::sqrt(var[axis]) : 0.0;
      dst[channels + static_cast<std::size_t>(axis)] = static_cast<float>(scaled);
    }
  }
  return out;
}

void SemanticCloud::append(const SemanticCloud& other) {
  if (size() == 0 && channels == 0) channels = other.channels;
  if (other.size() > 0 && other.channels != channels) throw ValidationError("cannot merge clouds of different widths");
  points.insert(points.end(), other.points.begin(), other.points.end());
  features.insert(features.end(), other.features.begin(), other.features.end());
  view_of_point.insert(view_of_point.end(), other.view_of_point.begin(), other.view_of_point.end());
}

SemanticCloud project_pooled_to_points(std::span<const PooledGrid> pooled, const GlobalGeometry& geometry) {
  if (pooled.size() != geometry.maps.size()) throw ValidationError("one pooled grid per view is required");
  SemanticCloud cloud;
  cloud.channels = pooled.empty() ? 0 : pooled.front().channels;
  for (std::size_t v = 0; v < pooled.size(); ++v) {
    const PooledGrid& grid = pooled[v];
    if (!grid.normalized) throw ValidationError("pooled grid of view " + std::to_string(v) + " is not normalized");
    if (grid.channels != cloud.channels) throw ValidationError("pooled grids differ in channel count");
    const PatchPointMap& map = geometry.maps[v];
    if (map.size() != grid.cells()) throw IntegrityError("patch-point map of view " + std::to_string(v) + " has wrong size");
    for (std::size_t c = 0; c < map.size(); ++c) {
      if (!map[c]) continue;
      const std::size_t p = *map[c];
      if (p >= geometry.points.size()) {
        throw IntegrityError("view " + std::to_string(v) + " cell " + std::to_string(c) + " maps to point " +
                             std::to_string(p) + " of " + std::to_string(geometry.points.size()));
      }
      cloud.points.push_back(geometry.points[p]);
      auto f = grid.cell(c);
      cloud.features.insert(cloud.features.end(), f.begin(), f.end());
      cloud.view_of_point.push_back(v);
    }
  }
  return cloud;
}

VoxelIndex voxel_of(const Eigen::Vector3d& p, double v) {
  return {static_cast<std::int64_t>(std::floor(p.x() / v)), static_cast<std::int64_t>(std::floor(p.y() / v)),
          static_cast<std::int64_t>(std::floor(p.z() / v))};
}

const VoxelCell* VoxelGrid::find(const VoxelIndex& index) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), index,
                             [](const VoxelCell& cell, const VoxelIndex& key) { return cell.index < key; });
  return it != cells.end() && it->index == index ? &*it : nullptr;
}

std::size_t VoxelGrid::point_count() const {
  std::size_t n = 0;
  for (const VoxelCell& c : cells) n += c.count;
  return n;
}

VoxelGrid voxel_downsample(const SemanticCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw ValidationError("voxel size must be positive, got " + std::to_string(voxel_size));
  }
  if (cloud.features.size() != cloud.size() * cloud.channels) throw IntegrityError("cloud features misaligned with points");

  std::map<VoxelIndex, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!cloud.points[i].allFinite()) throw ValidationError("cloud contains a non-finite point");
    groups[voxel_of(cloud.points[i], voxel_size)].push_back(i);
  }

  auto canonical_less = [&](std::size_t a, std::size_t b) {
    const Eigen::Vector3d& pa = cloud.points[a];
    const Eigen::Vector3d& pb = cloud.points[b];
    for (int k = 0; k < 3; ++k) {
      if (pa[k] != pb[k]) return pa[k] < pb[k];
    }
    auto fa = cloud.feature(a);
    auto fb = cloud.feature(b);
    return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(), fb.end());
  };

  VoxelGrid grid;
  grid.voxel_size = voxel_size;
  grid.channels = cloud.channels;
  grid.cells.reserve(groups.size());
  std::vector<double> acc(cloud.channels);
  for (auto& [index, members] : groups) {
    std::sort(members.begin(), members.end(), canonical_less);
    std::fill(acc.begin(), acc.end(), 0.0);
    VoxelCell cell;
    cell.index = index;
    cell.count = members.size();
    for (std::size_t i : members) {
      cell.centroid += cloud.points[i];
      auto f = cloud.feature(i);
      for (std::size_t j = 0; j < cloud.channels; ++j) acc[j] += f[j];
    }
    const double n = static_cast<double>(members.size());
    cell.centroid /= n;
    cell.feature.resize(cloud.channels);
    for (std::size_t j = 0; j < cloud.channels; ++j) cell.feature[j] = static_cast<float>(acc[j] / n);
    l2_normalize_inplace(cell.feature);
    grid.cells.push_back(std::move(cell));
  }
  return grid;
}

QueryResult query_grid(const VoxelGrid& grid, const PromptSet& prompts, float tau) {
  if (!(tau >= 0.0f && tau <= 1.0f)) throw ValidationError("threshold tau=" + std::to_string(tau) + " outside [0, 1]");
  prompts.validate();
  QueryResult result;
  if (grid.cells.empty()) return result;
  if (grid.channels != prompts.dims()) {
    throw ValidationError("grid features have " + std::to_string(grid.channels) + " channels, prompts have " +
                          std::to_string(prompts.dims()));
  }
  std::vector<float> features;
  features.reserve(grid.cells.size() * grid.channels);
  for (const VoxelCell& c : grid.cells) features.insert(features.end(), c.feature.begin(), c.feature.end());
  result.raw = combined_similarity(features, grid.channels, prompts);
  result.similarity = normalize_min_max(result.raw);
  result.labels.resize(result.similarity.size());
  for (std::size_t i = 0; i < result.labels.size(); ++i) result.labels[i] = result.similarity[i] >= tau ? 1 : 0;
  return result;
}

}  // namespace otas
