#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace otas {

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;
};

/// Rigid camera-to-world transform.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Rotation must be orthonormal with det +1 (tolerance 1e-5).
  void validate() const;
  /// From a row-major 4x4 homogeneous matrix; the bottom row must be (0, 0, 0, 1) within 1e-6.
  static Pose from_matrix(std::span<const double> row_major_4x4);
};

struct DepthMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;  // metres; non-finite marks an invalid pixel

  float at(std::size_t y, std::size_t x) const { return data[y * width + x]; }
};

/// Depths outside [min, max] are discarded. Zero and negative depths are always invalid.
struct DepthRange {
  double min = 0.0;
  double max = std::numeric_limits<double>::infinity();

  bool accepts(float z) const { return std::isfinite(z) && z > 0.0f && z >= min && z <= max; }
};

struct CameraFrame {
  DepthMap depth;
  Intrinsics intrinsics;
  Pose pose;
  DepthRange valid_range;
};

/// Per-cell median depth over a d x d tiling of the image.
///
/// Rows and columns are split into d tiles of near-equal size; remainder pixels go
/// to the leading tiles. A cell's pixel center is the center of its tile in
/// continuous pixel coordinates (pixel j covers [j, j + 1)).
struct MedianDepthGrid {
  std::size_t d = 0;
  std::size_t image_height = 0;
  std::size_t image_width = 0;
  std::vector<float> depths;          // d x d, meaningful only where valid
  std::vector<std::uint8_t> validity;  // d x d

  bool valid(std::size_t cell) const { return validity[cell] != 0; }
  std::size_t valid_count() const;
  Eigen::Vector2d cell_center(std::size_t cell) const;
};

/// Pixel range [begin, end) of tile `index` when `extent` pixels are split into `tiles`.
struct TileSpan {
  std::size_t begin;
  std::size_t end;
};
TileSpan tile_span(std::size_t extent, std::size_t tiles, std::size_t index);

MedianDepthGrid median_depth_grid(const CameraFrame& frame, std::size_t d);

using Points = std::vector<Eigen::Vector3d>;

/// cell index -> point index (none for cells without geometry). Injective over valid cells.
using PatchPointMap = std::vector<std::optional<std::size_t>>;

struct ViewGeometry {
  Points points;
  PatchPointMap map;
};

/// Pinhole back-projection of every valid cell center. Throws EmptyGeometryError
/// when no cell is valid.
ViewGeometry backproject(const MedianDepthGrid& grid, const Intrinsics& k);

/// Forward pinhole projection to pixel coordinates.
Eigen::Vector2d project(const Eigen::Vector3d& point, const Intrinsics& k);

/// p' = R p + t for every point.
Points to_global(const Points& points, const Pose& pose);

/// Union of all views in the global frame. Maps refer to indices in `points`.
struct GlobalGeometry {
  Points points;
  std::vector<PatchPointMap> maps;  // one per view
  std::vector<std::size_t> view_of_point;
};

GlobalGeometry merge_views(std::span<const ViewGeometry> views, std::span<const Pose> poses);

}  // namespace otas
