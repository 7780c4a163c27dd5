#include "commands.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "mftiq/file_io.hpp"
#include "mftiq/flo_io.hpp"
#include "mftiq/homography.hpp"
#include "mftiq/png_io.hpp"
#include "mftiq/synth.hpp"
#include "mftiq/track_io.hpp"
#include "mftiq/viz.hpp"

namespace mftiq::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string frame_name(int k) { return fmt::format("frame_{:06}.png", k); }
std::string pair_name(const char* stem, int a, int b, const char* ext) {
  return fmt::format("{}_{:06}_{:06}.{}", stem, a, b, ext);
}
std::string per_frame(const char* stem, int t, const char* ext) { return fmt::format("{}_{:06}.{}", stem, t, ext); }

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_floats(const Map2D<float>& map) {
  std::vector<std::uint8_t> out(map.size() * 4);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(map[i]);
    for (int b = 0; b < 4; ++b) out[i * 4 + static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return out;
}

Map2D<float> decode_floats(const fs::path& path, Resolution res) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  Map2D<float> out(res);
  if (bytes.size() != out.size() * 4) {
    throw LengthError(path.string() + ": " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(out.size() * 4));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + static_cast<std::size_t>(b)]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

Gray8 quantize_cost(const CostMap& cost) {
  Gray8 out(cost.resolution());
  for (std::size_t i = 0; i < cost.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(cost[i] * 8.0), 0L, 255L));
  }
  return out;
}

const std::vector<Rgb8>& delta_palette() {
  static const std::vector<Rgb8> palette = [] {
    std::vector<Rgb8> p(256);
    p[0] = {255, 255, 255};
    for (int i = 1; i < 256; ++i) {
      const Rgb8 c = track_color(static_cast<int>(std::bit_width(static_cast<unsigned>(i))));
      p[static_cast<std::size_t>(i)] = c;
    }
    return p;
  }();
  return palette;
}

// Flow pairs read when tracking from `origin` in `direction` over T frames.
void add_pairs(std::set<std::pair<int, int>>& pairs, int origin, int direction, int frames, const TrackerConfig& config) {
  const TimeAxis axis{origin, direction};
  const int length = direction > 0 ? frames - origin + 1 : origin;
  for (int t = 2; t <= length; ++t) {
    for (int d : valid_deltas(t, config)) {
      const int from = d == kDirectDelta ? 1 : t - d;
      pairs.emplace(axis.to_global(from), axis.to_global(t));
    }
  }
}

struct LoadedInput {
  std::vector<Image> frames;
  std::shared_ptr<const synth::SyntheticSequence> sequence;
};

std::vector<Image> load_frame_dir(const fs::path& dir) {
  std::vector<Image> frames;
  for (int k = 1;; ++k) {
    const fs::path p = dir / frame_name(k);
    if (!fs::exists(p)) break;
    frames.push_back(to_image(read_png_gray(p)));
  }
  if (frames.empty()) throw NotFoundError("no frames found: " + (dir / frame_name(1)).string(), 1, 1);
  return frames;
}

LoadedInput load_input(const RunConfig& config) {
  LoadedInput in;
  if (config.scene) {
    in.sequence = std::make_shared<const synth::SyntheticSequence>(
        synth::generate_sequence(synth::load_scene_spec(*config.scene), config.seed));
  }
  if (config.frames) {
    in.frames = load_frame_dir(*config.frames);
    if (in.sequence && static_cast<int>(in.frames.size()) != in.sequence->frame_count()) {
      throw DimensionError(fmt::format("{} frames on disk but the scene has {}", in.frames.size(),
                                       in.sequence->frame_count()));
    }
  } else {
    in.frames = in.sequence->frames();
  }
  return in;
}

struct Engine {
  std::shared_ptr<const FlowProvider> provider;
  std::shared_ptr<const quality::QualityEstimator> estimator;
};

Engine make_engine(const RunConfig& config, const LoadedInput& in) {
  std::shared_ptr<const FlowProvider> provider;
  if (config.provider.type == "dir") {
    provider = std::make_shared<DirectoryProvider>(config.provider.root, config.provider.pattern,
                                                   in.frames.front().resolution());
  } else if (config.provider.type == "synth") {
    provider = std::make_shared<SyntheticProvider>(*in.sequence);
  } else {
    provider = std::make_shared<ClassicalProvider>(in.frames, config.provider.classical);
  }
  if (config.cache > 0) provider = cached(provider, config.cache);

  std::shared_ptr<const quality::QualityEstimator> estimator;
  if (config.estimator.type == "oracle") {
    estimator = std::make_shared<quality::GroundTruthOracle>(*in.sequence, config.estimator.sharpness);
  } else {
    estimator = std::make_shared<quality::ClassicalEstimator>(config.estimator.classical,
                                                              config.estimator.backward_check ? provider : nullptr);
  }
  return {provider, estimator};
}

// Runs one tracker over frames origin, origin + direction, ... and hands every
// result to `sink`.
template <typename Sink>
void run_tracker(const RunConfig& config, const LoadedInput& in, const Engine& engine, TimeAxis axis, Sink&& sink) {
  Tracker tracker(config.tracker, engine.provider, engine.estimator, axis);
  const int frames = static_cast<int>(in.frames.size());
  const int length = axis.direction > 0 ? frames - axis.origin + 1 : axis.origin;
  for (int t = 1; t <= length; ++t) {
    const int g = axis.to_global(t);
    FrameResult r;
    try {
      r = tracker.step(t, in.frames[static_cast<std::size_t>(g - 1)]);
    } catch (const Error& e) {
      spdlog::error("frame {}: {}", g, e.what());
      throw;
    }
    sink(t, r);
  }
}

json histogram_json(const FrameResult& r) {
  const auto h = delta_histogram(std::span<const FrameResult>(&r, 1)).front();
  json j = json::object();
  for (const auto& [d, f] : h) j[delta_name(d)] = f;
  return j;
}

}  // namespace

void cmd_synth(const SynthOptions& opts) {
  if (opts.pairs != "tracker" && opts.pairs != "strided") {
    throw ArgumentError("--pairs must be tracker or strided, got '" + opts.pairs + "'");
  }
  if (opts.track_stride < 1 || opts.stride < 1) throw ArgumentError("strides must be >= 1");
  const synth::SceneSpec spec = synth::load_scene_spec(opts.spec);
  const synth::SyntheticSequence seq = synth::generate_sequence(spec, opts.seed);
  const int frames = seq.frame_count();
  for (const char* sub : {"frames", "flow", "occlusion", "valid"}) fs::create_directories(opts.out / sub);

  for (int k = 1; k <= frames; ++k) write_png(opts.out / "frames" / frame_name(k), to_gray8(seq.frame(k)));

  std::set<std::pair<int, int>> pairs;
  add_pairs(pairs, 1, 1, frames, opts.deltas);
  if (opts.pairs == "strided") {
    for (int f = 1; f <= frames; f += opts.stride) {
      add_pairs(pairs, f, 1, frames, opts.deltas);
      add_pairs(pairs, f, -1, frames, opts.deltas);
    }
  }
  for (const auto& [a, b] : pairs) {
    const synth::GroundTruthFlow gt = synth::gt_flow(seq, a, b);
    save_flo(gt.flow, opts.out / "flow" / pair_name("flow", a, b, "flo"));
    write_png(opts.out / "occlusion" / pair_name("occl", a, b, "png"),
              occlusion_to_gray8(synth::gt_occlusion(seq, a, b)));
    write_png(opts.out / "valid" / pair_name("valid", a, b, "png"), mask_to_gray8(gt.valid));
  }

  std::vector<int> all(static_cast<std::size_t>(frames));
  std::iota(all.begin(), all.end(), 1);
  GroundTruthFile gt{seq.resolution(), {}};
  std::vector<QueryPoint> queries;
  const int s = opts.track_stride;
  for (int y = s / 2; y < seq.resolution().height; y += s) {
    for (int x = s / 2; x < seq.resolution().width; x += s) {
      const Point2 q{static_cast<double>(x), static_cast<double>(y)};
      queries.push_back({static_cast<int>(gt.tracks.size()), q});
      gt.tracks.push_back(synth::gt_track(seq, q, all));
    }
  }
  save_ground_truth(opts.out / "tracks_gt.txt", gt);
  write_file_atomic(opts.out / "queries.txt", format_queries(queries));
  write_file_atomic(opts.out / "scene.json", synth::to_json(spec));
  write_json(opts.out / "manifest.json", {{"version", MFTIQ_VERSION},
                                          {"command", "synth"},
                                          {"seed", opts.seed},
                                          {"frames", frames},
                                          {"resolution", {seq.resolution().width, seq.resolution().height}},
                                          {"pairs", pairs.size()}});
  spdlog::info("synth: {} frames, {} flow pairs, {} tracks -> {}", frames, pairs.size(), gt.tracks.size(),
               opts.out.string());
}

void cmd_track(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const LoadedInput in = load_input(config);
  const Engine engine = make_engine(config, in);
  const fs::path& out = config.out;
  for (const char* sub : {"flow", "occlusion", "cost", "delta"}) fs::create_directories(out / sub);
  if (config.raw) fs::create_directories(out / "raw");

  json histograms = json::array();
  json per_frame_seconds = json::array();
  auto frame_start = std::chrono::steady_clock::now();
  run_tracker(config, in, engine, TimeAxis{}, [&](int t, const FrameResult& r) {
    save_flo(r.flow, out / "flow" / per_frame("flow", t, "flo"));
    write_png(out / "occlusion" / per_frame("occl", t, "png"), occlusion_to_gray8(r.occlusion));
    write_png(out / "cost" / per_frame("cost", t, "png"), quantize_cost(r.cost));
    Gray8 delta(r.delta_map.resolution());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = static_cast<std::uint8_t>(r.delta_map[i]);
    write_png_indexed(out / "delta" / per_frame("delta", t, "png"), delta, delta_palette());
    if (config.raw) {
      write_file_atomic(out / "raw" / per_frame("cost", t, "bin"), encode_floats(r.cost));
      write_file_atomic(out / "raw" / per_frame("occl", t, "bin"), encode_floats(r.occlusion));
    }
    histograms.push_back({{"frame", t}, {"fractions", histogram_json(r)}});
    const auto now = std::chrono::steady_clock::now();
    per_frame_seconds.push_back(std::chrono::duration<double>(now - frame_start).count());
    frame_start = now;
  });
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const Resolution res = in.frames.front().resolution();
  write_json(out / "manifest.json", {{"version", MFTIQ_VERSION},
                                     {"command", "track"},
                                     {"config", json::parse(to_json(config))},
                                     {"frames", in.frames.size()},
                                     {"resolution", {res.width, res.height}},
                                     {"delta_histogram", histograms},
                                     {"timings", {{"total_seconds", total}, {"per_frame_seconds", per_frame_seconds}}}});
  spdlog::info("track: {} frames in {:.2f}s -> {}", in.frames.size(), total, out.string());
}

namespace {

std::vector<FrameResult> load_track_dir(const fs::path& dir) {
  const json manifest = read_json(dir / "manifest.json");
  int frames = 0;
  try {
    frames = manifest.at("frames").get<int>();
  } catch (const json::exception&) {
    throw FormatError((dir / "manifest.json").string() + ": missing 'frames'");
  }
  std::vector<FrameResult> results;
  for (int t = 1; t <= frames; ++t) {
    FrameResult r;
    r.frame = t;
    r.flow = load_flo(dir / "flow" / per_frame("flow", t, "flo"));
    const Resolution res = r.flow.resolution();
    const fs::path raw_cost = dir / "raw" / per_frame("cost", t, "bin");
    const fs::path raw_occl = dir / "raw" / per_frame("occl", t, "bin");
    if (fs::exists(raw_occl)) {
      r.occlusion = decode_floats(raw_occl, res);
    } else {
      const Gray8 g = read_png_gray(dir / "occlusion" / per_frame("occl", t, "png"));
      r.occlusion = OcclusionMap(g.resolution());
      for (std::size_t i = 0; i < g.size(); ++i) r.occlusion[i] = static_cast<float>(g[i]) / 255.0f;
    }
    if (fs::exists(raw_cost)) {
      r.cost = decode_floats(raw_cost, res);
    } else {
      const Gray8 g = read_png_gray(dir / "cost" / per_frame("cost", t, "png"));
      r.cost = CostMap(g.resolution());
      for (std::size_t i = 0; i < g.size(); ++i) r.cost[i] = static_cast<float>(g[i]) / 8.0f;
    }
    require_same_shape(r.occlusion, r.flow, "track directory");
    require_same_shape(r.cost, r.flow, "track directory");
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace

void cmd_query(const QueryOptions& opts) {
  const std::vector<FrameResult> results = load_track_dir(opts.tracks);
  const std::vector<QueryPoint> queries = load_queries(opts.queries);
  std::vector<TrackRow> rows;
  for (const QueryPoint& q : queries) {
    for (const TrackSample& s : get_track(results, q.point)) {
      if (s.frame > 1) rows.push_back({q.track_id, s.frame, s.position, s.occluded, s.cost});
    }
  }
  save_tracks(opts.out, rows);
  spdlog::info("query: {} queries, {} rows -> {}", queries.size(), rows.size(), opts.out.string());
}

std::string cmd_eval(const EvalOptions& opts) {
  const GroundTruthFile gt = load_ground_truth(opts.gt);
  const std::vector<TrackRow> pred = load_tracks(opts.pred);
  const std::vector<metrics::EvalQuery> queries = metrics::make_queries(gt.tracks, opts.mode, opts.stride);
  const std::vector<metrics::ScoredPoint> pairs = metrics::pair_queries(queries, gt.tracks, group_predictions(pred));
  metrics::Report rep = metrics::evaluate(pairs, gt.resolution);
  rep.queries = queries.size();
  std::string text;
  text += fmt::format("queries {}\n", rep.queries);
  text += fmt::format("pairs {}\n", rep.pairs);
  text += "delta_avg " + format_number(rep.position.average) + "\n";
  text += "occlusion_accuracy " + format_number(rep.occlusion_accuracy) + "\n";
  text += "average_jaccard " + format_number(rep.jaccard.average) + "\n";
  if (opts.breakdown) {
    for (std::size_t k = 0; k < metrics::kThresholds.size(); ++k) {
      text += fmt::format("delta_{} {}\n", metrics::kThresholds[k], format_number(rep.position.per_threshold[k]));
    }
    for (std::size_t k = 0; k < metrics::kThresholds.size(); ++k) {
      text += fmt::format("jaccard_{} {}\n", metrics::kThresholds[k], format_number(rep.jaccard.per_threshold[k]));
    }
  }
  if (opts.out) write_file_atomic(*opts.out, text);
  return text;
}

void cmd_predict(const PredictOptions& opts) {
  const RunConfig& config = opts.run;
  config.validate();
  const GroundTruthFile gt = load_ground_truth(opts.gt);
  const LoadedInput in = load_input(config);
  if (in.frames.front().resolution() != gt.resolution) {
    throw DimensionError("ground truth resolution " + to_string(gt.resolution) + " differs from the frames " +
                         to_string(in.frames.front().resolution()));
  }
  const int frames = static_cast<int>(in.frames.size());
  const std::vector<metrics::EvalQuery> queries = metrics::make_queries(gt.tracks, opts.mode, opts.stride);
  const Engine engine = make_engine(config, in);

  // One tracker run per (query frame, direction).
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    if (q.frame < 1 || q.frame > frames) throw IndexError(fmt::format("query {} at frame {} outside video", i, q.frame));
    groups[{q.frame, q.direction == metrics::Direction::Forward ? 1 : -1}].push_back(i);
  }
  std::vector<std::vector<TrackRow>> per_query(queries.size());
  for (const auto& [key, members] : groups) {
    const TimeAxis axis{key.first, key.second};
    std::vector<FrameResult> results;
    run_tracker(config, in, engine, axis, [&](int, const FrameResult& r) { results.push_back(r); });
    for (std::size_t i : members) {
      for (const TrackSample& s : get_track(results, queries[i].point)) {
        if (s.frame > 1) {
          per_query[i].push_back({static_cast<int>(i), axis.to_global(s.frame), s.position, s.occluded, s.cost});
        }
      }
    }
  }
  std::vector<TrackRow> rows;
  for (auto& q : per_query) rows.insert(rows.end(), q.begin(), q.end());
  save_tracks(opts.out, rows);
  if (opts.queries_out) write_file_atomic(*opts.queries_out, format_eval_queries(queries));
  spdlog::info("predict: {} queries in {} tracker runs, {} rows -> {}", queries.size(), groups.size(), rows.size(),
               opts.out.string());
}

void cmd_viz(const VizOptions& opts) {
  if (!opts.flow && !opts.tracks) throw ArgumentError("viz needs --flow or --tracks");
  fs::create_directories(opts.out);
  std::size_t written = 0;
  if (opts.flow) {
    fs::path dir = *opts.flow;
    if (fs::is_directory(dir / "flow")) dir /= "flow";
    if (!fs::is_directory(dir)) throw NotFoundError("no flow directory: " + dir.string(), 0, 0);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".flo") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      write_png(opts.out / (f.stem().string() + ".png"), flow_to_color(load_flo(f), opts.max_magnitude));
      ++written;
    }
  }
  if (opts.tracks) {
    if (!opts.frames) throw ArgumentError("viz --tracks needs --frames");
    const std::vector<Image> frames = load_frame_dir(*opts.frames);
    std::map<int, std::vector<TrackRow>> by_frame;
    for (const TrackRow& r : load_tracks(*opts.tracks)) by_frame[r.frame].push_back(r);
    for (const auto& [frame, rows] : by_frame) {
      if (frame < 1 || frame > static_cast<int>(frames.size())) {
        throw IndexError(fmt::format("track rows reference frame {} but only {} frames exist", frame, frames.size()));
      }
      write_png(opts.out / per_frame("tracks", frame, "png"), draw_tracks(frames[static_cast<std::size_t>(frame - 1)], rows));
      ++written;
    }
  }
  spdlog::info("viz: {} images -> {}", written, opts.out.string());
}

void cmd_planar(const PlanarOptions& opts) {
  const std::vector<FrameResult> results = load_track_dir(opts.tracks);
  homography::PlanarParams params;
  params.grid_stride = opts.grid_stride;
  params.ransac.seed = opts.seed;
  const auto frames = homography::track_planar(results, opts.region, opts.points, params);
  write_file_atomic(opts.out, format_planar(frames));
  const auto carried = std::count_if(frames.begin(), frames.end(), [](const auto& f) { return f.carried_forward; });
  spdlog::info("planar: {} frames, {} carried forward -> {}", frames.size(), carried, opts.out.string());
}

}  // namespace mftiq::cli
