#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace otas {

struct PipelineConfig {
  std::size_t d = 16;
  std::size_t k = 4;
  std::size_t c_r = 4;
  double voxel_size = 0.5;  // metres
  float tau = 0.5f;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  double tol = 1e-4;
  double depth_min = 0.0;
  double depth_max = std::numeric_limits<double>::infinity();
  bool spatial = true;  // cluster on features + coordinates when geometry is available
  std::optional<std::string> refiner;  // command line of an external refiner

  /// Throws ValidationError on out-of-range values.
  void validate() const;
};

/// "small" (d=16), "large" (d=32) and "spatial" (d=64, v=0.5 m). All use k=4, c_r=4, tau=0.5.
PipelineConfig preset(std::string_view name);

/// Overrides fields present in a JSON object such as a manifest's "parameters" block.
void apply_parameters(PipelineConfig& config, const nlohmann::json& parameters);

nlohmann::json to_json(const PipelineConfig& config);

}  // namespace otas
