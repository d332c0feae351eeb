#include "otas/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "otas/error.hpp"

namespace otas {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("focal lengths must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw ValidationError("intrinsics must be finite");
  }
}

void Pose::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) throw ValidationError("pose must be finite");
  const double ortho = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-5) throw ValidationError("pose rotation is not orthonormal (error " + std::to_string(ortho) + ")");
  if (std::abs(rotation.determinant() - 1.0) > 1e-5) throw ValidationError("pose rotation has determinant != +1");
}

Pose Pose::from_matrix(std::span<const double> m) {
  if (m.size() != 16) throw ValidationError("pose needs 16 values, got " + std::to_string(m.size()));
  const double bottom[4] = {0.0, 0.0, 0.0, 1.0};
  for (int i = 0; i < 4; ++i) {
    if (std::abs(m[12 + i] - bottom[i]) > 1e-6) throw ValidationError("pose bottom row must be (0, 0, 0, 1)");
  }
  Pose pose;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) pose.rotation(r, c) = m[r * 4 + c];
    pose.translation[r] = m[r * 4 + 3];
  }
  pose.validate();
  return pose;
}

TileSpan tile_span(std::size_t extent, std::size_t tiles, std::size_t index) {
  const std::size_t base = extent / tiles;
  const std::size_t rem = extent % tiles;
  const std::size_t begin = index * base + std::min(index, rem);
  return {begin, begin + base + (index < rem ? 1 : 0)};
}

std::size_t MedianDepthGrid::valid_count() const {
  return static_cast<std::size_t>(std::count(validity.begin(), validity.end(), std::uint8_t{1}));
}

Eigen::Vector2d MedianDepthGrid::cell_center(std::size_t cell) const {
  const TileSpan rows = tile_span(image_height, d, cell / d);
  const TileSpan cols = tile_span(image_width, d, cell % d);
  return {0.5 * static_cast<double>(cols.begin + cols.end), 0.5 * static_cast<double>(rows.begin + rows.end)};
}

MedianDepthGrid median_depth_grid(const CameraFrame& frame, std::size_t d) {
  const DepthMap& depth = frame.depth;
  if (d == 0) throw ValidationError("grid side must be positive");
  if (depth.data.size() != depth.height * depth.width) throw ValidationError("depth map data length mismatch");
  if (d > std::min(depth.height, depth.width)) {
    throw ValidationError("grid side " + std::to_string(d) + " exceeds depth map size " + std::to_string(depth.height) +
                          "x" + std::to_string(depth.width));
  }
  if (frame.valid_range.min < 0.0) throw ValidationError("valid depth range must start at >= 0");

  MedianDepthGrid grid;
  grid.d = d;
  grid.image_height = depth.height;
  grid.image_width = depth.width;
  grid.depths.assign(d * d, 0.0f);
  grid.validity.assign(d * d, 0);

  std::vector<float> samples;
  for (std::size_t ty = 0; ty < d; ++ty) {
    const TileSpan rows = tile_span(depth.height, d, ty);
    for (std::size_t tx = 0; tx < d; ++tx) {
      const TileSpan cols = tile_span(depth.width, d, tx);
      samples.clear();
      for (std::size_t y = rows.begin; y < rows.end; ++y) {
        for (std::size_t x = cols.begin; x < cols.end; ++x) {
          const float z = depth.at(y, x);
          if (frame.valid_range.accepts(z)) samples.push_back(z);
        }
      }
      if (samples.empty()) continue;
      const std::size_t mid = samples.size() / 2;
      std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(mid), samples.end());
      double median = samples[mid];
      if (samples.size() % 2 == 0) {
        const float lower = *std::max_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (static_cast<double>(lower) + median);
      }
      grid.depths[ty * d + tx] = static_cast<float>(median);
      grid.validity[ty * d + tx] = 1;
    }
  }
  return grid;
}

ViewGeometry backproject(const MedianDepthGrid& grid, const Intrinsics& k) {
  k.validate();
  if (grid.valid_count() == 0) throw EmptyGeometryError("no cell carries a valid depth");
  ViewGeometry view;
  view.map.assign(grid.d * grid.d, std::nullopt);
  for (std::size_t cell = 0; cell < grid.d * grid.d; ++cell) {
    if (!grid.valid(cell)) continue;
    const Eigen::Vector2d uv = grid.cell_center(cell);
    const double z = grid.depths[cell];
    view.map[cell] = view.points.size();
    view.points.emplace_back((uv.x() - k.cx) * z / k.fx, (uv.y() - k.cy) * z / k.fy, z);
  }
  return view;
}

Eigen::Vector2d project(const Eigen::Vector3d& p, const Intrinsics& k) {
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

Points to_global(const Points& points, const Pose& pose) {
  pose.validate();
  Points out;
  out.reserve(points.size());
  for (const Eigen::Vector3d& p : points) out.push_back(pose.rotation * p + pose.translation);
  return out;
}

GlobalGeometry merge_views(std::span<const ViewGeometry> views, std::span<const Pose> poses) {
  if (views.size() != poses.size()) throw ValidationError("one pose per view is required");
  GlobalGeometry g;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const std::size_t offset = g.points.size();
    Points global = to_global(views[v].points, poses[v]);
    g.points.insert(g.points.end(), global.begin(), global.end());
    g.view_of_point.insert(g.view_of_point.end(), global.size(), v);
    PatchPointMap map = views[v].map;
    for (auto& entry : map) {
      if (entry) *entry += offset;
    }
    g.maps.push_back(std::move(map));
  }
  return g;
}

}  // namespace otas
