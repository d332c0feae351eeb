#pragma once

// Scene manifest: a JSON document describing frames and prompts. Relative paths
// are resolved against the manifest's directory.
//
// {
//   "name": "scene",
//   "frames": [{
//     "name": "000000",
//     "image": "images/000000.png",
//     "image_size": [H, W],                  // optional, otherwise read from the PNG
//     "vision_tokens": "tokens/000000_v.otf",  // (H', W', C_v)
//     "vl_tokens": "tokens/000000_vl.otf",     // (H_vl, W_vl, C_vl)
//     "depth": "depth/000000.otf",             // (H, W) metres, optional for 2-D use
//     "pose": [16 numbers, row-major 4x4 camera-to-world],
//     "intrinsics": {"fx": .., "fy": .., "cx": .., "cy": ..},
//     "ground_truth": "gt/000000.png"          // optional binary mask
//   }],
//   "prompts": {"road": "text/road.otf", "sky": "text/sky.otf"},  // (C_vl) each
//   "positive": ["road"],
//   "negative": ["sky"],
//   "parameters": {"d": 16, "k": 4, "c_r": 4, "tau": 0.5}      // optional overrides
// }

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "otas/alignment.hpp"
#include "otas/geometry.hpp"
#include "otas/png_io.hpp"

namespace otas {

struct FrameEntry {
  std::string name;
  std::filesystem::path image;
  std::optional<ImageSize> image_size;
  std::filesystem::path vision_tokens;
  std::filesystem::path vl_tokens;
  std::optional<std::filesystem::path> depth;
  std::optional<Pose> pose;
  std::optional<Intrinsics> intrinsics;
  std::optional<std::filesystem::path> ground_truth;
};

struct SceneManifest {
  std::filesystem::path root;
  std::string name;
  std::vector<FrameEntry> frames;
  std::map<std::string, std::filesystem::path> prompt_files;
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
  nlohmann::json parameters;
};

/// Parses and checks a manifest. Missing files and malformed entries raise FormatError;
/// an invalid pose raises ValidationError.
SceneManifest load_manifest(const std::filesystem::path& path);

/// Loads the named prompt embeddings. A list that is not given falls back to the
/// manifest's own positive/negative list; an explicitly empty negative list means none.
PromptSet load_prompts(const SceneManifest& manifest, const std::optional<std::vector<std::string>>& positives,
                       const std::optional<std::vector<std::string>>& negatives);

/// Image size from the manifest entry or, failing that, from the PNG header.
ImageSize image_size(const FrameEntry& frame);

}  // namespace otas
