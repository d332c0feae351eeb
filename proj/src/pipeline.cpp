#include "otas/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "otas/error.hpp"
#include "otas/otf.hpp"
#include "otas/png_io.hpp"

namespace otas {
namespace {

DepthMap load_depth(const std::filesystem::path& path) {
  OtfTensor t = read_otf(path);
  if (t.shape.size() != 2) throw FormatError(path.string() + ": depth must be a (H, W) tensor");
  DepthMap depth;
  depth.height = t.shape[0];
  depth.width = t.shape[1];
  depth.data = std::move(t.data);
  return depth;
}

KMeansOptions kmeans_options(const PipelineConfig& c) {
  KMeansOptions o;
  o.k = c.k;
  o.seed = c.seed;
  o.max_iters = c.max_iters;
  o.tol = c.tol;
  return o;
}

TokenGrid shared_vision_grid(const FeatureMap& vision, std::size_t d) {
  return l2_normalize(resize_bilinear(vision, d));
}

bool is_positive(int label, std::span<const int> positives) {
  if (positives.empty()) return label != 0;
  return std::find(positives.begin(), positives.end(), label) != positives.end();
}

}  // namespace

FrameData load_frame(const FrameEntry& entry, const PipelineConfig& config, bool need_geometry) {
  FrameData f;
  f.name = entry.name;
  f.vision = as_feature_map(read_otf(entry.vision_tokens));
  f.vl = as_feature_map(read_otf(entry.vl_tokens));
  const ImageSize size = image_size(entry);
  f.image = ImageRef{entry.image, size.height, size.width};
  if (entry.ground_truth) f.ground_truth = read_png_mask(*entry.ground_truth);
  if (need_geometry) {
    if (!entry.depth || !entry.pose || !entry.intrinsics) {
      throw FormatError("frame '" + entry.name + "' lacks depth, pose or intrinsics");
    }
    CameraFrame cam;
    cam.depth = load_depth(*entry.depth);
    cam.intrinsics = *entry.intrinsics;
    cam.pose = *entry.pose;
    cam.valid_range = DepthRange{config.depth_min, config.depth_max};
    f.camera = std::move(cam);
  }
  return f;
}

SegmentationResult segment_frame(const FeatureMap& vision, const FeatureMap& vl, const PromptSet& prompts,
                                 const PipelineConfig& config, const ImageRef& image, RefinerHook* hook) {
  config.validate();
  SegmentationResult r;
  r.vision = run_stage("resize", [&] { return shared_vision_grid(vision, config.d); });
  const TokenMatrix tokens = flatten(r.vision);
  const TokenMatrix reduced = run_stage("reduction", [&] { return pca_transform(pca_fit(tokens, config.c_r), tokens); });
  r.clusters = run_stage("clustering", [&] { return kmeans_fit(reduced, kmeans_options(config)); });
  r.masks = assignments_to_masks(r.clusters, 1, config.d);
  r.pooled = run_stage("pooling", [&] {
    return normalize_pooled(masked_average_pool(resize_nearest(vl, config.d), r.masks, 0));
  });
  r.raw_similarity = run_stage("similarity", [&] { return combined_similarity(r.pooled, prompts); });
  r.similarity = normalize_similarity(r.raw_similarity);
  r.mask = run_stage("refinement", [&] { return refine(image, r.similarity, hook, config.tau); });
  return r;
}

ReconstructionResult reconstruct(std::span<const FrameData> frames, const PipelineConfig& config) {
  config.validate();
  ReconstructionResult r;
  const std::size_t d = config.d;

  std::vector<ViewGeometry> views;
  std::vector<Pose> poses;
  run_stage("geometry", [&] {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const FrameData& f = frames[i];
      if (!f.camera) throw ValidationError("frame '" + f.name + "' has no camera data");
      const MedianDepthGrid grid = median_depth_grid(*f.camera, d);
      try {
        views.push_back(backproject(grid, f.camera->intrinsics));
      } catch (const EmptyGeometryError&) {
        r.warnings.push_back("frame '" + f.name + "' has no valid depth and was skipped");
        continue;
      }
      poses.push_back(f.camera->pose);
      r.frames_used.push_back(i);
    }
    if (views.empty()) throw EmptyGeometryError("no frame has usable depth");
    r.geometry = merge_views(views, poses);
  });

  const std::size_t n = r.frames_used.size();
  std::vector<TokenGrid> vision(n);
  run_stage("resize", [&] {
    for (std::size_t v = 0; v < n; ++v) vision[v] = shared_vision_grid(frames[r.frames_used[v]].vision, d);
  });

  run_stage("clustering", [&] {
    std::vector<int> labels(n * d * d, static_cast<int>(config.k));
    bool has_holes = false;
    if (config.spatial) {
      const SpatialMatrix spatial = build_spatial_features(vision, r.geometry);
      const TokenMatrix reduced = pca_transform(pca_fit(spatial.matrix, config.c_r), spatial.matrix);
      r.clusters = kmeans_fit(reduced, kmeans_options(config));
      for (std::size_t row = 0; row < spatial.origin.size(); ++row) {
        const auto [view, cell] = spatial.origin[row];
        labels[view * d * d + cell] = r.clusters.assignments[row];
      }
      has_holes = spatial.origin.size() < labels.size();
    } else {
      const TokenMatrix tokens = flatten(std::span<const TokenGrid>(vision));
      const TokenMatrix reduced = pca_transform(pca_fit(tokens, config.c_r), tokens);
      r.clusters = kmeans_fit(reduced, kmeans_options(config));
      labels = r.clusters.assignments;
    }
    r.masks = labels_to_masks(labels, config.k + (has_holes ? 1 : 0), n, d);
  });

  run_stage("pooling", [&] {
    r.pooled.reserve(n);
    for (std::size_t v = 0; v < n; ++v) {
      const TokenGrid vl = resize_nearest(frames[r.frames_used[v]].vl, d);
      r.pooled.push_back(normalize_pooled(masked_average_pool(vl, r.masks, v)));
      r.pooled.back().view_index = v;
    }
  });

  run_stage("fusion", [&] {
    r.cloud = project_pooled_to_points(r.pooled, r.geometry);
    r.grid = voxel_downsample(r.cloud, config.voxel_size);
  });
  return r;
}

Metrics evaluate_3d(std::span<const Eigen::Vector3d> pred_points, std::span<const int> pred_labels,
                    std::span<const LabeledPoint> gt, std::size_t k, std::span<const int> positive_labels) {
  if (pred_points.size() != pred_labels.size()) throw ValidationError("prediction points and labels differ in length");
  const std::vector<int> transferred = project_labels_knn(gt, pred_points, k);
  std::vector<std::uint8_t> pred(pred_labels.size()), truth(pred_labels.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pred[i] = pred_labels[i] != 0 ? 1 : 0;
    truth[i] = is_positive(transferred[i], positive_labels) ? 1 : 0;
  }
  return metrics(confusion(pred, truth));
}

std::string format_metrics_record(const MetricsRecord& record) {
  auto pct = [](double v) { return std::round(v * 1e6) / 1e4; };
  nlohmann::ordered_json j;
  j["name"] = record.name;
  j["iou"] = pct(record.metrics.iou);
  j["fsc"] = pct(record.metrics.fsc);
  j["pre"] = pct(record.metrics.pre);
  j["rec"] = pct(record.metrics.rec);
  if (record.seconds) j["seconds"] = *record.seconds;
  return j.dump();
}

}  // namespace otas
