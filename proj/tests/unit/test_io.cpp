#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "otas/config.hpp"
#include "otas/error.hpp"
#include "otas/grid_io.hpp"
#include "otas/manifest.hpp"
#include "otas/otf.hpp"
#include "otas/ply.hpp"
#include "otas/png_io.hpp"
#include "synthetic.hpp"

using namespace otas;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct PlyVertex {
  float x, y, z;
  Rgb rgb;
};

// Small independent PLY reader for the fixed header written by the library.
std::vector<PlyVertex> read_ply(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string line;
  std::size_t n = 0;
  std::vector<std::string> props;
  std::getline(in, line);
  REQUIRE(line == "ply");
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "element") {
      std::string kind;
      ss >> kind >> n;
    } else if (word == "property") {
      std::string type, name;
      ss >> type >> name;
      props.push_back(type + " " + name);
    } else if (word == "format") {
      std::string fmt;
      ss >> fmt;
      REQUIRE(fmt == "binary_little_endian");
    }
  }
  REQUIRE(props == std::vector<std::string>{"float x", "float y", "float z", "uchar red", "uchar green", "uchar blue"});
  std::vector<PlyVertex> out(n);
  for (auto& v : out) {
    char buf[15];
    in.read(buf, 15);
    REQUIRE(in.gcount() == 15);
    std::memcpy(&v.x, buf, 4);
    std::memcpy(&v.y, buf + 4, 4);
    std::memcpy(&v.z, buf + 8, 4);
    v.rgb = {static_cast<std::uint8_t>(buf[12]), static_cast<std::uint8_t>(buf[13]), static_cast<std::uint8_t>(buf[14])};
  }
  CHECK(in.peek() == std::char_traits<char>::eof());
  return out;
}

}  // namespace

TEST_CASE("OTF round trip is bit-identical") {
  const fs::path dir = testing::scratch_dir("otf");
  std::mt19937_64 rng(1);
  const FeatureMap m = testing::random_feature_map(3, 4, 5, rng);
  write_otf(dir / "t.otf", OtfTensor{{3, 4, 5}, m.data});
  const OtfTensor t = read_otf(dir / "t.otf");
  CHECK(t.shape == std::vector<std::uint32_t>{3, 4, 5});
  CHECK(std::memcmp(t.data.data(), m.data.data(), m.data.size() * 4) == 0);
  const FeatureMap back = as_feature_map(t);
  CHECK(back.channels == 5);
  write_otf(dir / "u.otf", t);
  CHECK(read_bytes(dir / "t.otf") == read_bytes(dir / "u.otf"));
}

TEST_CASE("OTF byte layout") {
  const std::vector<std::uint8_t> bytes = encode_otf(OtfTensor{{2}, {1.0f, -2.0f}});
  const std::vector<std::uint8_t> expected = {'O', 'T', 'F', '1', 0, 1, 2, 0, 0, 0,
                                              0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
  CHECK(bytes == expected);
}

TEST_CASE("OTF errors name the offset") {
  std::vector<std::uint8_t> bytes = encode_otf(OtfTensor{{2, 3}, std::vector<float>(6, 1.0f)});
  std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 3);
  try {
    decode_otf(truncated);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("offset 14") != std::string::npos);
  }
  std::vector<std::uint8_t> magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_WITH_AS(decode_otf(magic), doctest::Contains("offset 0"), FormatError);
  std::vector<std::uint8_t> dtype = bytes;
  dtype[4] = 1;
  CHECK_THROWS_WITH_AS(decode_otf(dtype), doctest::Contains("offset 4"), FormatError);
  std::vector<std::uint8_t> trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_otf(trailing), FormatError);
  CHECK_THROWS_AS(read_otf("/nonexistent/file.otf"), FormatError);
}

TEST_CASE("OTF with a zero-sized dimension is a valid empty tensor") {
  const OtfTensor t = decode_otf(encode_otf(OtfTensor{{0, 7}, {}}));
  CHECK(t.shape == std::vector<std::uint32_t>{0, 7});
  CHECK(t.data.empty());
  CHECK(t.element_count() == 0);
}

TEST_CASE("OTF role views check rank") {
  CHECK_THROWS_AS(as_feature_map(OtfTensor{{2, 2}, std::vector<float>(4)}), FormatError);
  CHECK_THROWS_AS(as_vector(OtfTensor{{2, 2}, std::vector<float>(4)}), FormatError);
  CHECK(as_matrix(OtfTensor{{2, 3}, std::vector<float>(6)}).cols == 3);
}

TEST_CASE("PNG masks round trip") {
  const fs::path dir = testing::scratch_dir("png");
  BinaryMask m(5, 7);
  for (std::size_t i = 0; i < m.data.size(); i += 3) m.data[i] = 1;
  write_png_mask(dir / "m.png", m);
  const BinaryMask back = read_png_mask(dir / "m.png");
  CHECK(back.height == 5);
  CHECK(back.width == 7);
  CHECK(back.data == m.data);
  const ImageSize size = read_png_size(dir / "m.png");
  CHECK(size.height == 5);
  CHECK(size.width == 7);
  std::ofstream(dir / "junk.png") << "not a png";
  CHECK_THROWS_AS(read_png_mask(dir / "junk.png"), FormatError);
}

TEST_CASE("PLY with one point parses with a reference reader") {
  const fs::path dir = testing::scratch_dir("ply");
  const std::vector<Eigen::Vector3d> pts = {{1.5, -2.25, 3.0}};
  const std::vector<Rgb> colors = {Rgb{10, 20, 30}};
  write_ply(dir / "one.ply", pts, colors);
  const auto verts = read_ply(dir / "one.ply");
  REQUIRE(verts.size() == 1);
  CHECK(verts[0].x == 1.5f);
  CHECK(verts[0].y == -2.25f);
  CHECK(verts[0].rgb == colors[0]);
}

TEST_CASE("PLY positions survive at float32 precision") {
  const fs::path dir = testing::scratch_dir("ply2");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 200; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  std::vector<Rgb> colors(pts.size(), Rgb{1, 2, 3});
  write_ply(dir / "many.ply", pts, colors);
  const auto verts = read_ply(dir / "many.ply");
  REQUIRE(verts.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(verts[i].x == static_cast<float>(pts[i].x()));
    CHECK(verts[i].y == static_cast<float>(pts[i].y()));
    CHECK(verts[i].z == static_cast<float>(pts[i].z()));
  }
}

TEST_CASE("label coloring with two labels gives two colors") {
  const fs::path dir = testing::scratch_dir("ply3");
  std::vector<Eigen::Vector3d> pts;
  std::vector<Rgb> colors;
  for (int i = 0; i < 10; ++i) {
    pts.emplace_back(i, 0, 0);
    colors.push_back(label_color(i % 2));
  }
  write_ply(dir / "labels.ply", pts, colors);
  std::set<Rgb> distinct;
  for (const auto& v : read_ply(dir / "labels.ply")) distinct.insert(v.rgb);
  CHECK(distinct.size() == 2);
  CHECK(similarity_color(-1.0f) == similarity_color(0.0f));
  CHECK(similarity_color(0.0f) != similarity_color(1.0f));
  CHECK_THROWS_AS(write_ply(dir / "empty.ply", {}, {}), ValidationError);
  CHECK_THROWS_AS(write_ply(dir / "bad.ply", pts, std::vector<Rgb>(3)), ValidationError);
}

TEST_CASE("presets carry the reported defaults") {
  const PipelineConfig small = preset("small");
  CHECK(small.d == 16);
  CHECK(small.k == 4);
  CHECK(small.c_r == 4);
  CHECK(small.tau == 0.5f);
  CHECK_FALSE(small.refiner.has_value());
  CHECK(preset("large").d == 32);
  const PipelineConfig spatial = preset("spatial");
  CHECK(spatial.d == 64);
  CHECK(spatial.voxel_size == 0.5);
  CHECK_THROWS_AS(preset("huge"), ValidationError);
}

TEST_CASE("config parameters and validation") {
  PipelineConfig c = preset("small");
  apply_parameters(c, nlohmann::json{{"d", 32}, {"k", 6}, {"depth_max", 150.0}, {"tau", 0.25}});
  CHECK(c.d == 32);
  CHECK(c.k == 6);
  CHECK(c.depth_max == 150.0);
  CHECK(c.tau == 0.25f);
  CHECK_NOTHROW(c.validate());
  c.tau = 1.5f;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = PipelineConfig{};
  c.voxel_size = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = PipelineConfig{};
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK_THROWS_AS(apply_parameters(c, nlohmann::json{{"d", "big"}}), FormatError);
  CHECK(to_json(preset("small")).at("d") == 16);
}

TEST_CASE("manifest loading, prompts and errors") {
  const fs::path dir = testing::scratch_dir("manifest");
  const testing::Synthetic2dScene scene = testing::write_synthetic_2d_scene(dir);
  const SceneManifest m = load_manifest(scene.manifest);
  REQUIRE(m.frames.size() == 1);
  CHECK(m.frames[0].ground_truth.has_value());
  CHECK(m.positives == std::vector<std::string>{"gravel", "road", "dirt"});
  CHECK(m.negatives == std::vector<std::string>{"sky", "grass", "forest"});
  const PromptSet prompts = load_prompts(m, std::nullopt, std::nullopt);
  CHECK(prompts.positives.size() == 3);
  CHECK(prompts.negatives.size() == 3);
  for (const auto& t : prompts.positives) {
    double sq = 0.0;
    for (float v : t.vector) sq += static_cast<double>(v) * v;
    CHECK(std::abs(sq - 1.0) < 1e-5);
  }
  CHECK(load_prompts(m, std::vector<std::string>{"road"}, std::vector<std::string>{"sky"}).positives.front().prompt == "road");
  CHECK_THROWS_AS(load_prompts(m, std::vector<std::string>{"lava"}, std::nullopt), ValidationError);
  CHECK(load_prompts(m, std::nullopt, std::vector<std::string>{}).negatives.empty());
  CHECK_THROWS_AS(load_prompts(m, std::vector<std::string>{}, std::nullopt), ValidationError);
  CHECK(image_size(m.frames[0]).width == 64);

  fs::remove(dir / "vl.otf");
  CHECK_THROWS_AS(load_manifest(scene.manifest), FormatError);
  CHECK_THROWS_AS(load_manifest(dir / "missing.json"), FormatError);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK_THROWS_AS(load_manifest(dir / "broken.json"), FormatError);
}

TEST_CASE("manifest rejects a bad pose bottom row") {
  const fs::path dir = testing::scratch_dir("manifest-pose");
  const testing::Synthetic3dScene scene = testing::write_synthetic_3d_scene(dir);
  CHECK(load_manifest(scene.manifest).frames.size() == 2);
  std::ifstream in(scene.manifest);
  nlohmann::json j = nlohmann::json::parse(in);
  j["frames"][1]["pose"][15] = 2.0;
  std::ofstream(dir / "bad.json") << j.dump();
  CHECK_THROWS_AS(load_manifest(dir / "bad.json"), ValidationError);
}

TEST_CASE("voxel grids round trip through their files") {
  const fs::path dir = testing::scratch_dir("grid");
  std::mt19937_64 rng(3);
  SemanticCloud cloud;
  cloud.channels = 4;
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    cloud.points.emplace_back(u(rng), u(rng), u(rng));
    const auto f = testing::random_unit_vector(4, rng);
    cloud.features.insert(cloud.features.end(), f.begin(), f.end());
    cloud.view_of_point.push_back(0);
  }
  const VoxelGrid g = voxel_downsample(cloud, 0.5);
  save_voxel_grid(dir, g);
  const VoxelGrid back = load_voxel_grid(dir);
  CHECK(back.voxel_size == g.voxel_size);
  REQUIRE(back.cells.size() == g.cells.size());
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    CHECK(back.cells[i].index == g.cells[i].index);
    CHECK(back.cells[i].feature == g.cells[i].feature);
    CHECK(back.cells[i].count == g.cells[i].count);
    CHECK((back.cells[i].centroid - g.cells[i].centroid).norm() < 1e-9);
  }
  CHECK_THROWS_AS(load_voxel_grid(dir / "nope"), FormatError);
}
