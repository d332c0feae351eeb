// otas: open-vocabulary segmentation and language-queryable voxel maps from
// pre-computed encoder tokens.
//
//   otas segment2d     --manifest scene.json --out out/ [--preset small] ...
//   otas reconstruct3d --manifest scene.json --out out/ [--preset spatial] ...
//   otas query         --grid out/ --manifest scene.json --out q/ [--prompts-pos a,b] ...
//   otas eval          --pred pred --gt gt --mode 2d|3d [--k 5] [--out metrics.json]

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "otas/error.hpp"
#include "otas/grid_io.hpp"
#include "otas/otf.hpp"
#include "otas/pipeline.hpp"
#include "otas/ply.hpp"
#include "otas/png_io.hpp"

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flags shared by the pipeline commands. Unset flags leave the preset/manifest value.
struct ConfigFlags {
  std::string preset;
  std::optional<std::size_t> d, k, c_r, max_iters;
  std::optional<double> voxel, depth_min, depth_max;
  std::optional<float> tau;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> refiner;
  bool no_spatial = false;

  void add_to(CLI::App& app, const std::string& default_preset, bool geometry) {
    preset = default_preset;
    app.add_option("--preset", preset, "Configuration preset: small, large or spatial")->capture_default_str();
    app.add_option("--d", d, "Shared grid side length");
    app.add_option("--k", k, "Number of clusters");
    app.add_option("--cr", c_r, "Reduced feature dimension");
    app.add_option("--tau", tau, "Similarity threshold in [0, 1]");
    app.add_option("--seed", seed, "k-Means seed");
    app.add_option("--max-iters", max_iters, "k-Means iteration limit");
    if (geometry) {
      app.add_option("--voxel", voxel, "Voxel size in metres");
      app.add_option("--depth-min", depth_min, "Discard depths below this value (metres)");
      app.add_option("--depth-max", depth_max, "Discard depths above this value (metres)");
      app.add_flag("--no-spatial", no_spatial, "Cluster on vision features only");
    } else {
      app.add_option("--refiner", refiner, "External refiner command line");
    }
  }

  otas::PipelineConfig resolve(const otas::SceneManifest& manifest) const {
    otas::PipelineConfig c = otas::preset(preset);
    otas::apply_parameters(c, manifest.parameters);
    if (d) c.d = *d;
    if (k) c.k = *k;
    if (c_r) c.c_r = *c_r;
    if (max_iters) c.max_iters = *max_iters;
    if (voxel) c.voxel_size = *voxel;
    if (depth_min) c.depth_min = *depth_min;
    if (depth_max) c.depth_max = *depth_max;
    if (tau) c.tau = *tau;
    if (seed) c.seed = *seed;
    if (refiner) c.refiner = *refiner;
    if (no_spatial) c.spatial = false;
    c.validate();
    return c;
  }
};

struct PromptFlags {
  std::optional<std::string> positives;
  std::optional<std::string> negatives;

  void add_to(CLI::App& app) {
    app.add_option("--prompts-pos", positives, "Comma-separated positive prompt names");
    app.add_option("--prompts-neg", negatives, "Comma-separated negative prompt names (\"\" for none)");
  }
  otas::PromptSet load(const otas::SceneManifest& m) const {
    auto list = [](const std::optional<std::string>& text) -> std::optional<std::vector<std::string>> {
      if (!text) return std::nullopt;
      return split_list(*text);
    };
    return otas::load_prompts(m, list(positives), list(negatives));
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw otas::IoError("cannot write " + path.string());
  out << text << '\n';
}

void print_metrics(const otas::Metrics& m) {
  std::printf("IoU %.2f  Fsc %.2f  Pre %.2f  Rec %.2f\n", 100.0 * m.iou, 100.0 * m.fsc, 100.0 * m.pre, 100.0 * m.rec);
}

int run_segment2d(const fs::path& manifest_path, const fs::path& out, const ConfigFlags& flags,
                  const PromptFlags& prompt_flags, bool record_timing) {
  const otas::SceneManifest manifest = otas::run_stage("manifest", [&] { return otas::load_manifest(manifest_path); });
  const otas::PipelineConfig config = flags.resolve(manifest);
  if (manifest.frames.size() != 1) {
    throw otas::ValidationError("segment2d expects a single-frame manifest, got " +
                                std::to_string(manifest.frames.size()) + " frames");
  }
  const otas::PromptSet prompts = otas::run_stage("prompts", [&] { return prompt_flags.load(manifest); });
  const otas::FrameData frame = otas::run_stage("load", [&] { return otas::load_frame(manifest.frames[0], config, false); });

  std::unique_ptr<otas::RefinerHook> hook;
  if (config.refiner) hook = std::make_unique<otas::SubprocessRefiner>(otas::SubprocessRefiner::split_command(*config.refiner));

  const auto start = Clock::now();
  const otas::SegmentationResult result =
      otas::segment_frame(frame.vision, frame.vl, prompts, config, frame.image, hook.get());
  const double seconds = seconds_since(start);

  std::optional<otas::Metrics> scores;
  if (frame.ground_truth) {
    scores = otas::run_stage("eval", [&] { return otas::metrics(otas::confusion(result.mask, *frame.ground_truth)); });
  }

  fs::create_directories(out);
  otas::write_png_mask(out / "mask.png", result.mask);
  const std::uint32_t shape[2] = {static_cast<std::uint32_t>(config.d), static_cast<std::uint32_t>(config.d)};
  otas::write_otf(out / "similarity.otf", shape, result.similarity.data);
  std::vector<float> clusters(result.clusters.assignments.begin(), result.clusters.assignments.end());
  otas::write_otf(out / "clusters.otf", shape, clusters);
  if (scores) {
    otas::MetricsRecord record{frame.name, *scores, std::nullopt};
    if (record_timing) record.seconds = seconds;
    write_text(out / "metrics.json", otas::format_metrics_record(record));
  }

  std::printf("segment2d: %zu x %zu mask, %zu positive pixels, %.4f s\n", result.mask.height, result.mask.width,
              result.mask.count(), seconds);
  if (scores) print_metrics(*scores);
  return 0;
}

int run_reconstruct3d(const fs::path& manifest_path, const fs::path& out, const ConfigFlags& flags) {
  const otas::SceneManifest manifest = otas::run_stage("manifest", [&] { return otas::load_manifest(manifest_path); });
  const otas::PipelineConfig config = flags.resolve(manifest);
  std::vector<otas::FrameData> frames;
  otas::run_stage("load", [&] {
    for (const otas::FrameEntry& entry : manifest.frames) frames.push_back(otas::load_frame(entry, config, true));
  });

  const auto start = Clock::now();
  const otas::ReconstructionResult result = otas::reconstruct(frames, config);
  const double seconds = seconds_since(start);
  for (const std::string& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  fs::create_directories(out);
  otas::save_voxel_grid(out, result.grid);
  std::vector<Eigen::Vector3d> centroids;
  std::vector<float> features;
  for (const otas::VoxelCell& c : result.grid.cells) {
    centroids.push_back(c.centroid);
    features.insert(features.end(), c.feature.begin(), c.feature.end());
  }
  otas::write_ply(out / "grid.ply", centroids, otas::feature_colors(features, result.grid.channels));

  std::printf("reconstruct3d: %zu/%zu frames, %zu points, %zu voxels (v=%.3f m)\n", result.frames_used.size(),
              frames.size(), result.cloud.size(), result.grid.cells.size(), config.voxel_size);
  std::printf("total reconstruction seconds: %.4f\n", seconds);
  return 0;
}

int run_query(const fs::path& grid_dir, const fs::path& manifest_path, const fs::path& out,
              const PromptFlags& prompt_flags, float tau) {
  const otas::VoxelGrid grid = otas::run_stage("load", [&] { return otas::load_voxel_grid(grid_dir); });
  const otas::SceneManifest manifest = otas::run_stage("manifest", [&] { return otas::load_manifest(manifest_path); });
  const otas::PromptSet prompts = otas::run_stage("prompts", [&] { return prompt_flags.load(manifest); });
  const otas::QueryResult result = otas::run_stage("query", [&] { return otas::query_grid(grid, prompts, tau); });
  if (grid.cells.empty()) throw otas::EmptyGeometryError("voxel grid is empty; nothing to export");

  fs::create_directories(out);
  std::vector<Eigen::Vector3d> centroids;
  std::vector<otas::Rgb> label_colors, sim_colors;
  std::vector<float> labeled_points;
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const Eigen::Vector3d& c = grid.cells[i].centroid;
    centroids.push_back(c);
    label_colors.push_back(otas::label_color(result.labels[i]));
    sim_colors.push_back(otas::similarity_color(result.similarity[i]));
    labeled_points.insert(labeled_points.end(), {static_cast<float>(c.x()), static_cast<float>(c.y()),
                                                 static_cast<float>(c.z()), static_cast<float>(result.labels[i])});
  }
  otas::write_ply(out / "query_labels.ply", centroids, label_colors);
  otas::write_ply(out / "query_similarity.ply", centroids, sim_colors);
  const std::uint32_t sim_shape[1] = {static_cast<std::uint32_t>(grid.cells.size())};
  otas::write_otf(out / "query_similarity.otf", sim_shape, result.similarity);
  const std::uint32_t point_shape[2] = {static_cast<std::uint32_t>(grid.cells.size()), 4};
  otas::write_otf(out / "query_points.otf", point_shape, labeled_points);

  std::size_t positives = 0;
  for (auto l : result.labels) positives += l;
  std::printf("query: %zu voxels, %zu labeled positive at tau=%.3f\n", grid.cells.size(), positives, tau);
  return 0;
}

struct PointLabels {
  std::vector<Eigen::Vector3d> points;
  std::vector<int> labels;
};

PointLabels read_point_labels(const fs::path& path) {
  const otas::TokenMatrix m = otas::as_matrix(otas::read_otf(path));
  if (m.cols != 4) throw otas::FormatError(path.string() + ": expected (N, 4) rows of x, y, z, label");
  PointLabels out;
  for (std::size_t i = 0; i < m.rows; ++i) {
    auto r = m.row(i);
    out.points.emplace_back(r[0], r[1], r[2]);
    out.labels.push_back(static_cast<int>(std::lround(r[3])));
  }
  return out;
}

int run_eval(const fs::path& pred, const fs::path& gt, const std::string& mode, std::size_t k,
             const std::string& positive_labels, const std::string& name, const std::optional<fs::path>& out) {
  otas::Metrics m;
  if (mode == "2d") {
    const otas::BinaryMask p = otas::read_png_mask(pred);
    const otas::BinaryMask g = otas::read_png_mask(gt);
    m = otas::metrics(otas::confusion(p, g));
  } else if (mode == "3d") {
    const PointLabels p = read_point_labels(pred);
    const PointLabels g = read_point_labels(gt);
    std::vector<otas::LabeledPoint> labeled;
    for (std::size_t i = 0; i < g.points.size(); ++i) labeled.push_back({g.points[i], g.labels[i]});
    std::vector<int> positives;
    for (const std::string& s : split_list(positive_labels)) positives.push_back(std::stoi(s));
    m = otas::evaluate_3d(p.points, p.labels, labeled, k, positives);
  } else {
    throw otas::ValidationError("eval mode must be 2d or 3d");
  }
  print_metrics(m);
  if (out) write_text(*out, otas::format_metrics_record({name.empty() ? pred.stem().string() : name, m, std::nullopt}));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-vocabulary token alignment: 2-D segmentation and language-queryable voxel maps"};
  app.require_subcommand(1);

  fs::path manifest, out, grid_dir, pred, gt;
  bool record_timing = false;

  auto* seg = app.add_subcommand("segment2d", "Segment a single frame into a binary mask");
  ConfigFlags seg_flags;
  PromptFlags seg_prompts;
  seg->add_option("--manifest", manifest, "Scene manifest (JSON)")->required();
  seg->add_option("--out", out, "Output directory")->required();
  seg->add_flag("--record-timing", record_timing, "Include pipeline seconds in metrics.json");
  seg_flags.add_to(*seg, "small", false);
  seg_prompts.add_to(*seg);

  auto* rec = app.add_subcommand("reconstruct3d", "Fuse posed RGB-D frames into a voxel feature grid");
  ConfigFlags rec_flags;
  rec->add_option("--manifest", manifest, "Scene manifest (JSON)")->required();
  rec->add_option("--out", out, "Output directory")->required();
  rec_flags.add_to(*rec, "spatial", true);

  auto* qry = app.add_subcommand("query", "Label a saved voxel grid with text prompts");
  PromptFlags qry_prompts;
  float tau = 0.5f;
  qry->add_option("--grid", grid_dir, "Directory written by reconstruct3d")->required();
  qry->add_option("--manifest", manifest, "Manifest defining the prompt embeddings")->required();
  qry->add_option("--out", out, "Output directory")->required();
  qry->add_option("--tau", tau, "Similarity threshold in [0, 1]")->capture_default_str();
  qry_prompts.add_to(*qry);

  auto* ev = app.add_subcommand("eval", "IoU / F-score / precision / recall of a prediction");
  std::string mode = "2d", positive_labels, name;
  std::size_t knn = 5;
  std::optional<fs::path> metrics_out;
  ev->add_option("--pred", pred, "Predicted mask (PNG) or labeled points (OTF, N x 4)")->required();
  ev->add_option("--gt", gt, "Ground-truth mask (PNG) or labeled points (OTF, N x 4)")->required();
  ev->add_option("--mode", mode, "2d or 3d")->capture_default_str();
  ev->add_option("--k", knn, "Neighbours for 3-D label transfer")->capture_default_str();
  ev->add_option("--positive-labels", positive_labels, "Comma-separated ground-truth labels counted as positive");
  ev->add_option("--name", name, "Record name");
  ev->add_option("--out", metrics_out, "Write the metrics record here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(otas::ExitCode::kValidation);
  }

  try {
    if (seg->parsed()) return run_segment2d(manifest, out, seg_flags, seg_prompts, record_timing);
    if (rec->parsed()) return run_reconstruct3d(manifest, out, rec_flags);
    if (qry->parsed()) return run_query(grid_dir, manifest, out, qry_prompts, tau);
    if (ev->parsed()) return run_eval(pred, gt, mode, knn, positive_labels, name, metrics_out);
  } catch (const otas::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(otas::ExitCode::kInternal);
  }
  return 0;
}
