#pragma once

// A saved voxel grid is a directory holding
//   grid.json          voxel size, channel count and per-cell index / count / centroid
//   grid_features.otf  (cells, channels) unit-norm features, same order as grid.json

#include <filesystem>

#include "otas/fusion.hpp"

namespace otas {

void save_voxel_grid(const std::filesystem::path& dir, const VoxelGrid& grid);
VoxelGrid load_voxel_grid(const std::filesystem::path& dir);

}  // namespace otas
