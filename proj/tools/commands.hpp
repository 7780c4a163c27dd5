#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mftiq/metrics.hpp"
#include "mftiq/track.hpp"
#include "run_config.hpp"

namespace mftiq::cli {

struct SynthOptions {
  std::filesystem::path spec;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  // Flow pairs to write: "tracker" (what forward tracking with `deltas` reads)
  // or "strided" (also backward chains and direct pairs from every
  // stride-th frame).
  std::string pairs = "tracker";
  TrackerConfig deltas;
  int stride = 5;
  int track_stride = 8;
};

struct QueryOptions {
  std::filesystem::path tracks;
  std::filesystem::path queries;
  std::filesystem::path out;
};

struct EvalOptions {
  std::filesystem::path pred;
  std::filesystem::path gt;
  metrics::QueryMode mode = metrics::QueryMode::First;
  int stride = 5;
  std::optional<std::filesystem::path> out;
  bool breakdown = false;
};

struct PredictOptions {
  RunConfig run;
  std::filesystem::path gt;
  metrics::QueryMode mode = metrics::QueryMode::First;
  int stride = 5;
  std::filesystem::path out;
  std::optional<std::filesystem::path> queries_out;
};

struct VizOptions {
  std::optional<std::filesystem::path> flow;
  std::optional<std::filesystem::path> tracks;
  std::optional<std::filesystem::path> frames;
  std::filesystem::path out;
  double max_magnitude = 0.0;
};

struct PlanarOptions {
  std::filesystem::path tracks;
  Quad region;
  Quad points;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  int grid_stride = 4;
};

void cmd_synth(const SynthOptions& opts);
void cmd_track(const RunConfig& config);
void cmd_query(const QueryOptions& opts);
// Returns the report text.
std::string cmd_eval(const EvalOptions& opts);
void cmd_predict(const PredictOptions& opts);
void cmd_viz(const VizOptions& opts);
void cmd_planar(const PlanarOptions& opts);

}  // namespace mftiq::cli
