#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mftiq/providers.hpp"
#include "mftiq/quality.hpp"
#include "mftiq/tracker.hpp"

namespace mftiq::cli {

struct ProviderConfig {
  std::string type = "classical";  // dir | synth | classical
  std::filesystem::path root;      // dir
  std::string pattern = DirectoryProvider::kDefaultPattern;
  ClassicalFlowParams classical;
};

struct EstimatorConfig {
  std::string type = "classical";  // oracle | classical
  double sharpness = 8.0;          // oracle
  quality::ClassicalQualityParams classical;
  bool backward_check = true;  // classical: forward-backward occlusion test
};

// Everything a track/predict run depends on.
struct RunConfig {
  std::optional<std::filesystem::path> frames;  // directory of frame_NNNNNN.png
  std::optional<std::filesystem::path> scene;   // scene spec, rendered with `seed`
  std::uint64_t seed = 0;
  ProviderConfig provider;
  EstimatorConfig estimator;
  TrackerConfig tracker;
  std::size_t cache = 64;
  std::filesystem::path out = "out";
  bool raw = false;

  void validate() const;
};

// JSON document; unknown keys are rejected with their line number.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config);

}  // namespace mftiq::cli
