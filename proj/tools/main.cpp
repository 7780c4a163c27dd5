#include <cstdio>
#include <iostream>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace mftiq;
using namespace mftiq::cli;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

Quad parse_quad(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("bad coordinate '" + item + "'");
    }
  }
  if (v.size() != 8) throw ArgumentError("expected 8 comma-separated coordinates, got " + std::to_string(v.size()));
  Quad q;
  for (std::size_t i = 0; i < 4; ++i) q[i] = {v[2 * i], v[2 * i + 1]};
  return q;
}

// Options shared by track and predict; applied over the config file.
struct RunFlags {
  std::string config;
  std::string scene;
  std::string frames;
  std::string flow_root;
  std::string deltas;
  std::string mode;
  std::string provider;
  std::string estimator;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t cache = 0;
  bool raw = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* cache_opt = nullptr;

  void add(CLI::App* app, bool with_out) {
    app->add_option("--config", config, "run configuration (JSON)");
    app->add_option("--scene", scene, "scene spec to render and track");
    app->add_option("--frames", frames, "directory of frame_NNNNNN.png");
    app->add_option("--flow-root", flow_root, "flow directory for --provider dir");
    seed_opt = app->add_option("--seed", seed, "scene seed");
    app->add_option("--deltas", deltas, "comma list of deltas, 'direct' for the template match");
    app->add_option("--mode", mode, "selection mode")->check(CLI::IsMember({"soft", "hard"}));
    app->add_option("--provider", provider, "flow provider")->check(CLI::IsMember({"dir", "synth", "classical"}));
    app->add_option("--estimator", estimator, "quality estimator")->check(CLI::IsMember({"oracle", "classical"}));
    cache_opt = app->add_option("--cache", cache, "flow cache capacity (0 disables)");
    if (with_out) {
      app->add_option("--out", out, "output directory");
      app->add_flag("--raw-cost", raw, "also dump raw float32 cost and occlusion maps");
    }
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_run_config(config);
    if (!scene.empty()) c.scene = scene;
    if (!frames.empty()) c.frames = frames;
    if (!flow_root.empty()) c.provider.root = flow_root;
    if (*seed_opt) c.seed = seed;
    if (!deltas.empty()) parse_deltas(deltas, c.tracker);
    if (!mode.empty()) c.tracker.mode = parse_selection_mode(mode);
    if (!provider.empty()) c.provider.type = provider;
    if (!estimator.empty()) c.estimator.type = estimator;
    if (*cache_opt) c.cache = cache;
    if (!out.empty()) c.out = out;
    if (raw) c.raw = true;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-term dense point tracking by flow chaining with independent quality estimates", "mftiq"};
  app.set_version_flag("--version", MFTIQ_VERSION);
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  SynthOptions synth;
  std::string synth_spec, synth_out, synth_deltas;
  auto* synth_cmd = app.add_subcommand("synth", "render a synthetic scene with ground truth");
  synth_cmd->add_option("--spec", synth_spec, "scene spec (JSON)")->required();
  synth_cmd->add_option("--seed", synth.seed, "texture and noise seed");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--pairs", synth.pairs, "flow pairs to write")->check(CLI::IsMember({"tracker", "strided"}));
  synth_cmd->add_option("--deltas", synth_deltas, "delta set the written pairs serve");
  synth_cmd->add_option("--stride", synth.stride, "query frame stride for --pairs strided");
  synth_cmd->add_option("--track-stride", synth.track_stride, "pixel spacing of ground-truth tracks");

  RunFlags track_flags;
  auto* track_cmd = app.add_subcommand("track", "track every pixel of frame 1 through the video");
  track_flags.add(track_cmd, true);

  QueryOptions query;
  std::string query_tracks, query_points, query_out;
  auto* query_cmd = app.add_subcommand("query", "extract point tracks from a track directory");
  query_cmd->add_option("--tracks", query_tracks, "output directory of 'track'")->required();
  query_cmd->add_option("--queries", query_points, "query file")->required();
  query_cmd->add_option("--out", query_out, "track text output")->required();

  EvalOptions eval;
  std::string eval_pred, eval_gt, eval_out, eval_mode = "first";
  auto* eval_cmd = app.add_subcommand("eval", "score predicted tracks against ground truth");
  eval_cmd->add_option("--pred", eval_pred, "predicted tracks")->required();
  eval_cmd->add_option("--gt", eval_gt, "ground-truth tracks")->required();
  eval_cmd->add_option("--mode", eval_mode, "query mode")->check(CLI::IsMember({"first", "strided"}));
  eval_cmd->add_option("--stride", eval.stride, "query frame stride");
  eval_cmd->add_option("--out", eval_out, "report file (default stdout)");
  eval_cmd->add_flag("--breakdown", eval.breakdown, "per-threshold values");

  RunFlags predict_flags;
  PredictOptions predict;
  std::string predict_gt, predict_out, predict_queries, predict_mode = "first";
  auto* predict_cmd = app.add_subcommand("predict", "track the evaluation queries of a ground-truth file");
  predict_flags.add(predict_cmd, false);
  predict_cmd->add_option("--gt", predict_gt, "ground-truth tracks")->required();
  predict_cmd->add_option("--eval-mode", predict_mode, "query mode")->check(CLI::IsMember({"first", "strided"}));
  predict_cmd->add_option("--stride", predict.stride, "query frame stride");
  predict_cmd->add_option("--out", predict_out, "predicted track text")->required();
  predict_cmd->add_option("--queries-out", predict_queries, "write the generated queries here");

  VizOptions viz;
  std::string viz_flow, viz_tracks, viz_frames, viz_out;
  auto* viz_cmd = app.add_subcommand("viz", "render flows or tracks as PNG");
  viz_cmd->add_option("--flow", viz_flow, "directory of .flo files or a track directory");
  viz_cmd->add_option("--tracks", viz_tracks, "track text file");
  viz_cmd->add_option("--frames", viz_frames, "frame directory for --tracks");
  viz_cmd->add_option("--max", viz.max_magnitude, "flow magnitude at full saturation (0 = auto)");
  viz_cmd->add_option("--out", viz_out, "output directory")->required();

  PlanarOptions planar;
  std::string planar_tracks, planar_region, planar_points, planar_out;
  auto* planar_cmd = app.add_subcommand("planar", "fit per-frame homographies and transfer control points");
  planar_cmd->add_option("--tracks", planar_tracks, "output directory of 'track'")->required();
  planar_cmd->add_option("--region", planar_region, "x1,y1,...,x4,y4 of the plane on frame 1")->required();
  planar_cmd->add_option("--points", planar_points, "x1,y1,...,x4,y4 control points")->required();
  planar_cmd->add_option("--seed", planar.seed, "RANSAC seed");
  planar_cmd->add_option("--grid", planar.grid_stride, "correspondence grid stride");
  planar_cmd->add_option("--out", planar_out, "control-point text output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  spdlog::set_default_logger(spdlog::stderr_color_mt("mftiq"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("%^%l%$: %v");

  try {
    if (*synth_cmd) {
      synth.spec = synth_spec;
      synth.out = synth_out;
      if (!synth_deltas.empty()) parse_deltas(synth_deltas, synth.deltas);
      cmd_synth(synth);
    } else if (*track_cmd) {
      cmd_track(track_flags.resolve());
    } else if (*query_cmd) {
      query.tracks = query_tracks;
      query.queries = query_points;
      query.out = query_out;
      cmd_query(query);
    } else if (*eval_cmd) {
      eval.pred = eval_pred;
      eval.gt = eval_gt;
      eval.mode = metrics::parse_query_mode(eval_mode);
      if (!eval_out.empty()) eval.out = eval_out;
      const std::string report = cmd_eval(eval);
      if (!eval.out) std::cout << report;
    } else if (*predict_cmd) {
      predict.run = predict_flags.resolve();
      predict.gt = predict_gt;
      predict.mode = metrics::parse_query_mode(predict_mode);
      predict.out = predict_out;
      if (!predict_queries.empty()) predict.queries_out = predict_queries;
      cmd_predict(predict);
    } else if (*viz_cmd) {
      if (!viz_flow.empty()) viz.flow = viz_flow;
      if (!viz_tracks.empty()) viz.tracks = viz_tracks;
      if (!viz_frames.empty()) viz.frames = viz_frames;
      viz.out = viz_out;
      cmd_viz(viz);
    } else if (*planar_cmd) {
      planar.tracks = planar_tracks;
      planar.region = parse_quad(planar_region);
      planar.points = parse_quad(planar_points);
      planar.out = planar_out;
      cmd_planar(planar);
    }
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternal;
  }
  return 0;
}
