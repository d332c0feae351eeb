#include "otas/grid_io.hpp"

#include <fstream>

#include "json.hpp"
#include "otas/error.hpp"
#include "otas/otf.hpp"

namespace otas {

namespace fs = std::filesystem;
using nlohmann::json;

void save_voxel_grid(const fs::path& dir, const VoxelGrid& grid) {
  fs::create_directories(dir);
  json cells = json::array();
  std::vector<float> features;
  features.reserve(grid.cells.size() * grid.channels);
  for (const VoxelCell& c : grid.cells) {
    cells.push_back({{"index", {c.index.x, c.index.y, c.index.z}},
                     {"count", c.count},
                     {"centroid", {c.centroid.x(), c.centroid.y(), c.centroid.z()}}});
    features.insert(features.end(), c.feature.begin(), c.feature.end());
  }
  const json doc = {{"format", "otas-voxel-grid"}, {"version", 1},          {"voxel_size", grid.voxel_size},
                    {"channels", grid.channels},    {"features", "grid_features.otf"}, {"cells", cells}};
  std::ofstream out(dir / "grid.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "grid.json").string());
  out << doc.dump(1) << '\n';
  const std::uint32_t shape[2] = {static_cast<std::uint32_t>(grid.cells.size()),
                                  static_cast<std::uint32_t>(grid.channels)};
  write_otf(dir / "grid_features.otf", shape, features);
}

VoxelGrid load_voxel_grid(const fs::path& dir) {
  std::ifstream in(dir / "grid.json");
  if (!in) throw FormatError("no voxel grid at " + dir.string());
  VoxelGrid grid;
  try {
    const json doc = json::parse(in);
    if (doc.value("format", "") != "otas-voxel-grid") throw FormatError("not a voxel grid file: " + dir.string());
    grid.voxel_size = doc.at("voxel_size").get<double>();
    grid.channels = doc.at("channels").get<std::size_t>();
    const TokenMatrix features = as_matrix(read_otf(dir / doc.at("features").get<std::string>()));
    const json& cells = doc.at("cells");
    if (features.rows != cells.size() || (features.rows > 0 && features.cols != grid.channels)) {
      throw FormatError("voxel features do not match grid.json in " + dir.string());
    }
    grid.cells.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const json& j = cells[i];
      VoxelCell c;
      const auto idx = j.at("index").get<std::vector<std::int64_t>>();
      const auto centroid = j.at("centroid").get<std::vector<double>>();
      if (idx.size() != 3 || centroid.size() != 3) throw FormatError("voxel cell " + std::to_string(i) + " malformed");
      c.index = {idx[0], idx[1], idx[2]};
      c.count = j.at("count").get<std::size_t>();
      c.centroid = {centroid[0], centroid[1], centroid[2]};
      auto row = features.row(i);
      c.feature.assign(row.begin(), row.end());
      if (!grid.cells.empty() && !(grid.cells.back().index < c.index)) {
        throw FormatError("voxel cells are not sorted in " + dir.string());
      }
      grid.cells.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed grid.json in " + dir.string() + ": " + e.what());
  }
  return grid;
}

}  // namespace otas
