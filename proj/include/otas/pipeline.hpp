#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otas/alignment.hpp"
#include "otas/clustering.hpp"
#include "otas/config.hpp"
#include "otas/error.hpp"
#include "otas/evaluation.hpp"
#include "otas/fusion.hpp"
#include "otas/geometry.hpp"
#include "otas/manifest.hpp"
#include "otas/reduction.hpp"
#include "otas/refinement.hpp"

namespace otas {

/// Runs `fn`, tagging any otas::Error that escapes with `stage`.
template <class Fn>
decltype(auto) run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (Error& e) {
    e.set_stage(stage);
    throw;
  }
}

/// Everything the encoder-free pipeline needs for one frame, already in memory.
struct FrameData {
  std::string name;
  FeatureMap vision;
  FeatureMap vl;
  ImageRef image;
  std::optional<CameraFrame> camera;
  std::optional<BinaryMask> ground_truth;
};

/// Reads the frame's tensors; geometry is required only when `need_geometry` is set.
FrameData load_frame(const FrameEntry& entry, const PipelineConfig& config, bool need_geometry);

struct SegmentationResult {
  TokenGrid vision;
  ClusterModel clusters;
  MaskSet masks;
  PooledGrid pooled;
  SimilarityMap raw_similarity;
  SimilarityMap similarity;  // normalized to [0, 1]
  BinaryMask mask;           // image resolution
};

/// Single-image segmentation: resize, normalize, PCA, k-Means, masks, pooling,
/// prompt similarity, normalization, then refinement (hook or threshold).
SegmentationResult segment_frame(const FeatureMap& vision, const FeatureMap& vl, const PromptSet& prompts,
                                 const PipelineConfig& config, const ImageRef& image, RefinerHook* hook = nullptr);

struct ReconstructionResult {
  GlobalGeometry geometry;
  ClusterModel clusters;
  MaskSet masks;  // k masks, plus one trailing mask for cells without geometry in spatial mode
  std::vector<PooledGrid> pooled;
  SemanticCloud cloud;
  VoxelGrid grid;
  std::vector<std::size_t> frames_used;
  std::vector<std::string> warnings;
};

/// Multi-view reconstruction into a voxel feature grid. Frames without any valid
/// depth are skipped with a warning; zero usable frames is an EmptyGeometryError.
ReconstructionResult reconstruct(std::span<const FrameData> frames, const PipelineConfig& config);

/// Binary metrics for 3-D labels: ground-truth labels are transferred to the predicted
/// points by k-NN majority vote first. A label is positive when it is in
/// `positive_labels`, or nonzero if that list is empty.
Metrics evaluate_3d(std::span<const Eigen::Vector3d> pred_points, std::span<const int> pred_labels,
                    std::span<const LabeledPoint> gt, std::size_t k, std::span<const int> positive_labels = {});

struct MetricsRecord {
  std::string name;
  Metrics metrics;
  std::optional<double> seconds;
};

/// One-line JSON record; metric values are percentages.
std::string format_metrics_record(const MetricsRecord& record);

}  // namespace otas
