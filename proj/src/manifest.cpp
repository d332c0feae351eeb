#include "otas/manifest.hpp"

#include <fstream>

#include "otas/error.hpp"
#include "otas/otf.hpp"

namespace otas {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path resolve(const fs::path& root, const json& value, const std::string& what) {
  if (!value.is_string()) throw FormatError(what + " must be a path string");
  fs::path p = value.get<std::string>();
  if (p.is_relative()) p = root / p;
  if (!fs::exists(p)) throw FormatError(what + " not found: " + p.string());
  return p;
}

FrameEntry parse_frame(const fs::path& root, const json& j, std::size_t index) {
  const std::string where = "frame " + std::to_string(index);
  if (!j.is_object()) throw FormatError(where + " must be an object");
  FrameEntry f;
  f.name = j.value("name", std::to_string(index));
  if (!j.contains("image")) throw FormatError(where + " lacks an image");
  if (!j.contains("vision_tokens")) throw FormatError(where + " lacks vision_tokens");
  if (!j.contains("vl_tokens")) throw FormatError(where + " lacks vl_tokens");
  f.image = resolve(root, j.at("image"), where + " image");
  f.vision_tokens = resolve(root, j.at("vision_tokens"), where + " vision_tokens");
  f.vl_tokens = resolve(root, j.at("vl_tokens"), where + " vl_tokens");
  if (j.contains("image_size")) {
    const auto size = j.at("image_size").get<std::vector<std::size_t>>();
    if (size.size() != 2) throw FormatError(where + " image_size must be [height, width]");
    f.image_size = ImageSize{size[0], size[1]};
  }
  if (j.contains("depth")) f.depth = resolve(root, j.at("depth"), where + " depth");
  if (j.contains("ground_truth")) f.ground_truth = resolve(root, j.at("ground_truth"), where + " ground_truth");
  if (j.contains("pose")) {
    const auto values = j.at("pose").get<std::vector<double>>();
    try {
      f.pose = Pose::from_matrix(values);
    } catch (ValidationError& e) {
      e.set_stage(where);
      throw;
    }
  }
  if (j.contains("intrinsics")) {
    const json& k = j.at("intrinsics");
    f.intrinsics = Intrinsics{k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                              k.at("cy").get<double>()};
    f.intrinsics->validate();
  }
  return f;
}

}  // namespace

SceneManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  SceneManifest m;
  m.root = path.has_parent_path() ? path.parent_path() : fs::path(".");
  try {
    const json j = json::parse(in);
    m.name = j.value("name", path.stem().string());
    if (!j.contains("frames") || !j.at("frames").is_array() || j.at("frames").empty()) {
      throw FormatError("manifest needs a non-empty 'frames' array");
    }
    for (std::size_t i = 0; i < j.at("frames").size(); ++i) m.frames.push_back(parse_frame(m.root, j.at("frames")[i], i));
    if (j.contains("prompts")) {
      for (const auto& [name, file] : j.at("prompts").items()) {
        m.prompt_files[name] = resolve(m.root, file, "prompt '" + name + "'");
      }
    }
    m.positives = j.value("positive", std::vector<std::string>{});
    m.negatives = j.value("negative", std::vector<std::string>{});
    if (j.contains("parameters")) m.parameters = j.at("parameters");
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest " + path.string() + ": " + e.what());
  }
  return m;
}

PromptSet load_prompts(const SceneManifest& manifest, const std::optional<std::vector<std::string>>& positives,
                       const std::optional<std::vector<std::string>>& negatives) {
  auto load = [&](const std::string& name) {
    auto it = manifest.prompt_files.find(name);
    if (it == manifest.prompt_files.end()) throw ValidationError("prompt '" + name + "' is not defined in the manifest");
    return TextEmbedding::from_values(name, as_vector(read_otf(it->second)));
  };
  PromptSet set;
  for (const std::string& p : positives.value_or(manifest.positives)) set.positives.push_back(load(p));
  for (const std::string& n : negatives.value_or(manifest.negatives)) set.negatives.push_back(load(n));
  set.validate();
  return set;
}

ImageSize image_size(const FrameEntry& frame) {
  if (frame.image_size) return *frame.image_size;
  return read_png_size(frame.image);
}

}  // namespace otas
