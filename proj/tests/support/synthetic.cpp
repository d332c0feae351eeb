#include "synthetic.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "otas/otf.hpp"
#include "otas/png_io.hpp"

namespace otas::testing {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<float> random_unit_vector(std::size_t dims, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dims);
  double sq = 0.0;
  for (double& x : v) {
    x = normal(rng);
    sq += x * x;
  }
  std::vector<float> out(dims);
  for (std::size_t i = 0; i < dims; ++i) out[i] = static_cast<float>(v[i] / std::sqrt(sq));
  return out;
}

FeatureMap random_feature_map(std::size_t h, std::size_t w, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> data(h * w * c);
  for (float& v : data) v = u(rng);
  return FeatureMap(h, w, c, std::move(data));
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("otas-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

namespace {

void write_tensor(const fs::path& path, std::vector<std::uint32_t> shape, const std::vector<float>& data) {
  write_otf(path, OtfTensor{std::move(shape), data});
}

void write_gray_image(const fs::path& path, std::size_t h, std::size_t w) {
  BinaryMask img(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) img.data[y * w + x] = ((x / 8 + y / 8) % 2) ? 1 : 0;
  write_png_mask(path, img);
}

std::vector<float> basis(std::size_t dims, std::initializer_list<std::size_t> axes) {
  std::vector<float> v(dims, 0.0f);
  for (std::size_t a : axes) v[a] = 1.0f;
  l2_normalize_inplace(v);
  return v;
}

}  // namespace

Synthetic2dScene write_synthetic_2d_scene(const fs::path& dir, std::uint64_t seed, std::size_t cv, std::size_t cvl) {
  fs::create_directories(dir / "text");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> noise(-1.0f, 1.0f);
  const std::size_t d = 16, image_side = 64;
  const float noise_amp = 0.004f;

  Synthetic2dScene s;
  std::vector<std::vector<float>> protos;
  for (int q = 0; q < 4; ++q) protos.push_back(random_unit_vector(cv, rng));
  s.min_prototype_distance = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      double sq = 0.0;
      for (std::size_t i = 0; i < cv; ++i) sq += std::pow(protos[a][i] - protos[b][i], 2);
      s.min_prototype_distance = std::min(s.min_prototype_distance, std::sqrt(sq));
    }

  auto quadrant = [&](std::size_t y, std::size_t x, std::size_t side) {
    return static_cast<int>((y >= side / 2 ? 2 : 0) + (x >= side / 2 ? 1 : 0));
  };

  std::vector<float> vision(d * d * cv);
  s.partition.resize(d * d);
  for (std::size_t y = 0; y < d; ++y)
    for (std::size_t x = 0; x < d; ++x) {
      const int q = quadrant(y, x, d);
      s.partition[y * d + x] = q;
      double sq = 0.0;
      for (std::size_t c = 0; c < cv; ++c) {
        const float n = noise_amp * noise(rng);
        sq += static_cast<double>(n) * n;
        vision[(y * d + x) * cv + c] = protos[static_cast<std::size_t>(q)][c] + n;
      }
      s.max_noise_norm = std::max(s.max_noise_norm, std::sqrt(sq));
    }

  // Vision-language prototypes are the first four coordinate axes.
  const std::size_t vl_side = 8;
  std::vector<float> vl(vl_side * vl_side * cvl);
  for (std::size_t y = 0; y < vl_side; ++y)
    for (std::size_t x = 0; x < vl_side; ++x) {
      const int q = quadrant(y, x, vl_side);
      for (std::size_t c = 0; c < cvl; ++c) {
        vl[(y * vl_side + x) * cvl + c] = (c == static_cast<std::size_t>(q) ? 1.0f : 0.0f) + 0.01f * noise(rng);
      }
    }

  // Left quadrants (0 and 2) are the target concept.
  const std::vector<std::pair<std::string, std::vector<float>>> texts = {
      {"gravel", basis(cvl, {0})}, {"road", basis(cvl, {2})},   {"dirt", basis(cvl, {0, 2})},
      {"sky", basis(cvl, {1})},    {"grass", basis(cvl, {3})}, {"forest", basis(cvl, {1, 3})},
  };
  json prompts = json::object();
  for (const auto& [name, vec] : texts) {
    write_tensor(dir / "text" / (name + ".otf"), {static_cast<std::uint32_t>(cvl)}, vec);
    prompts[name] = "text/" + name + ".otf";
    TextEmbedding t = TextEmbedding::from_values(name, vec);
    if (name == "gravel" || name == "road" || name == "dirt") s.prompts.positives.push_back(t);
    else s.prompts.negatives.push_back(t);
  }

  write_tensor(dir / "vision.otf", {16, 16, static_cast<std::uint32_t>(cv)}, vision);
  write_tensor(dir / "vl.otf", {8, 8, static_cast<std::uint32_t>(cvl)}, vl);
  write_gray_image(dir / "image.png", image_side, image_side);
  s.ground_truth = BinaryMask(image_side, image_side);
  for (std::size_t y = 0; y < image_side; ++y)
    for (std::size_t x = 0; x < image_side / 2; ++x) s.ground_truth.data[y * image_side + x] = 1;
  write_png_mask(dir / "gt.png", s.ground_truth);

  const json manifest = {
      {"name", "synthetic-2d"},
      {"frames",
       {{{"name", "frame0"},
         {"image", "image.png"},
         {"vision_tokens", "vision.otf"},
         {"vl_tokens", "vl.otf"},
         {"ground_truth", "gt.png"}}}},
      {"prompts", prompts},
      {"positive", {"gravel", "road", "dirt"}},
      {"negative", {"sky", "grass", "forest"}},
      {"parameters", {{"d", 16}, {"k", 4}, {"c_r", 4}, {"tau", 0.5}}},
  };
  s.manifest = dir / "manifest.json";
  std::ofstream(s.manifest) << manifest.dump(2);

  s.vision = FeatureMap(16, 16, cv, vision);
  s.vl = FeatureMap(8, 8, cvl, vl);
  s.image = ImageRef{dir / "image.png", image_side, image_side};
  return s;
}

Synthetic3dScene write_synthetic_3d_scene(const fs::path& dir, std::uint64_t seed, bool third_view_without_depth) {
  fs::create_directories(dir / "text");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> noise(-1.0f, 1.0f);
  const std::size_t side = 32, d = 16, cv = 24, cvl = 8;
  const std::vector<float> grass_v = random_unit_vector(cv, rng);
  // antipodal, so the semantic gap outweighs position in spatial clustering
  std::vector<float> stone_v(grass_v);
  for (float& v : stone_v) v = -v;

  json frames = json::array();
  const std::size_t n_views = third_view_without_depth ? 3 : 2;
  for (std::size_t view = 0; view < n_views; ++view) {
    const std::string id = "view" + std::to_string(view);
    std::vector<float> vision(d * d * cv), vl(d * d * cvl), depth(side * side);
    for (std::size_t y = 0; y < d; ++y)
      for (std::size_t x = 0; x < d; ++x) {
        const bool left = x < d / 2;
        const auto& proto = left ? grass_v : stone_v;
        for (std::size_t c = 0; c < cv; ++c) vision[(y * d + x) * cv + c] = proto[c] + 0.01f * noise(rng);
        for (std::size_t c = 0; c < cvl; ++c) {
          vl[(y * d + x) * cvl + c] = (c == (left ? 0u : 1u) ? 1.0f : 0.0f) + 0.02f * noise(rng);
        }
      }
    const float layer = view == 0 ? 4.0f : 5.0f;
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x) {
        float z = layer + 0.05f * static_cast<float>(y) / static_cast<float>(side);
        if (view == 2) z = std::numeric_limits<float>::quiet_NaN();
        if ((x + 3 * y) % 17 == 0) z = std::numeric_limits<float>::quiet_NaN();
        if ((x * 7 + y) % 23 == 0) z = 151.0f;
        depth[y * side + x] = z;
      }
    write_otf(dir / (id + "_v.otf"), OtfTensor{{16, 16, static_cast<std::uint32_t>(cv)}, vision});
    write_otf(dir / (id + "_vl.otf"), OtfTensor{{16, 16, static_cast<std::uint32_t>(cvl)}, vl});
    write_otf(dir / (id + "_depth.otf"), OtfTensor{{32, 32}, depth});
    frames.push_back({{"name", id},
                      {"image", id + "_v.otf"},
                      {"image_size", {side, side}},
                      {"vision_tokens", id + "_v.otf"},
                      {"vl_tokens", id + "_vl.otf"},
                      {"depth", id + "_depth.otf"},
                      {"pose", {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}},
                      {"intrinsics", {{"fx", 20.0}, {"fy", 20.0}, {"cx", 16.0}, {"cy", 16.0}}}});
  }
  json prompts = json::object();
  const std::vector<std::pair<std::string, std::vector<float>>> texts = {{"grass", basis(cvl, {0})},
                                                                         {"stone", basis(cvl, {1})}};
  for (const auto& [name, vec] : texts) {
    write_otf(dir / "text" / (name + ".otf"), OtfTensor{{static_cast<std::uint32_t>(cvl)}, vec});
    prompts[name] = "text/" + name + ".otf";
  }
  const json manifest = {{"name", "synthetic-3d"},
                         {"frames", frames},
                         {"prompts", prompts},
                         {"positive", {"grass"}},
                         {"negative", {"stone"}},
                         {"parameters", {{"d", 16}, {"k", 4}, {"c_r", 4}, {"voxel_size", 0.5}, {"depth_max", 150.0}}}};
  Synthetic3dScene s;
  s.manifest = dir / "manifest.json";
  s.views = n_views;
  std::ofstream(s.manifest) << manifest.dump(2);
  return s;
}

}  // namespace otas::testing
