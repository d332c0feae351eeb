#include "otas/config.hpp"

#include <cmath>

#include "otas/error.hpp"

namespace otas {

void PipelineConfig::validate() const {
  if (d < 1) throw ValidationError("d must be >= 1");
  if (k < 1) throw ValidationError("k must be >= 1");
  if (c_r < 1) throw ValidationError("c_r must be >= 1");
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) throw ValidationError("voxel size must be > 0");
  if (!(tau >= 0.0f && tau <= 1.0f)) throw ValidationError("tau must lie in [0, 1]");
  if (!(tol >= 0.0)) throw ValidationError("tolerance must be >= 0");
  if (!(depth_min >= 0.0) || !(depth_max > depth_min)) throw ValidationError("depth range must satisfy 0 <= min < max");
}

PipelineConfig preset(std::string_view name) {
  PipelineConfig c;
  if (name == "small") {
    c.d = 16;
  } else if (name == "large") {
    c.d = 32;
  } else if (name == "spatial") {
    c.d = 64;
    c.voxel_size = 0.5;
  } else {
    throw ValidationError("unknown preset '" + std::string(name) + "' (expected small, large or spatial)");
  }
  return c;
}

void apply_parameters(PipelineConfig& c, const nlohmann::json& p) {
  if (p.is_null()) return;
  if (!p.is_object()) throw FormatError("pipeline parameters must be a JSON object");
  try {
    if (p.contains("preset")) c = preset(p.at("preset").get<std::string>());
    if (p.contains("d")) c.d = p.at("d").get<std::size_t>();
    if (p.contains("k")) c.k = p.at("k").get<std::size_t>();
    if (p.contains("c_r")) c.c_r = p.at("c_r").get<std::size_t>();
    if (p.contains("voxel_size")) c.voxel_size = p.at("voxel_size").get<double>();
    if (p.contains("tau")) c.tau = p.at("tau").get<float>();
    if (p.contains("seed")) c.seed = p.at("seed").get<std::uint64_t>();
    if (p.contains("max_iters")) c.max_iters = p.at("max_iters").get<std::size_t>();
    if (p.contains("tol")) c.tol = p.at("tol").get<double>();
    if (p.contains("depth_min")) c.depth_min = p.at("depth_min").get<double>();
    if (p.contains("depth_max")) c.depth_max = p.at("depth_max").get<double>();
    if (p.contains("spatial")) c.spatial = p.at("spatial").get<bool>();
    if (p.contains("refiner")) c.refiner = p.at("refiner").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad pipeline parameter: ") + e.what());
  }
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j = {{"d", c.d},         {"k", c.k},       {"c_r", c.c_r},
                      {"voxel_size", c.voxel_size}, {"tau", c.tau}, {"seed", c.seed},
                      {"max_iters", c.max_iters},   {"tol", c.tol}, {"depth_min", c.depth_min},
                      {"spatial", c.spatial}};
  if (std::isfinite(c.depth_max)) j["depth_max"] = c.depth_max;
  if (c.refiner) j["refiner"] = *c.refiner;
  return j;
}

}  // namespace otas
