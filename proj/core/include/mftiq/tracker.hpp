#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mftiq/map2d.hpp"

namespace mftiq {

class FlowProvider;
namespace quality {
class QualityEstimator;
}

// The direct template-to-current candidate (gap t - 1) is stored as 0 in
// delta lists and delta maps.
inline constexpr int kDirectDelta = 0;

enum class SelectionMode {
  SoftPenalty,    // score = E + M [O > 0.5]
  HardExclusion,  // occluded candidates excluded; all-occluded pixels fall back to SoftPenalty
};

struct TrackerConfig {
  std::vector<int> deltas{1, 2, 4, 8, 16, 32};  // finite gaps, ascending, unique
  bool include_direct = true;
  double occlusion_penalty = 1e5;
  float occlusion_threshold = kOcclusionThreshold;
  SelectionMode mode = SelectionMode::SoftPenalty;

  // Throws ArgumentError. At least one of 1 and direct must be present,
  // otherwise frame 2 has no candidate.
  void validate() const;
  int max_finite_delta() const;
};

// "1,2,4,direct" -> deltas {1,2,4} + direct. Throws ArgumentError.
void parse_deltas(std::string_view text, TrackerConfig& config);
std::string format_deltas(const TrackerConfig& config);
// "direct" for kDirectDelta, the number otherwise.
std::string delta_name(int delta);

SelectionMode parse_selection_mode(std::string_view text);
std::string_view to_string(SelectionMode mode);

// Finite gaps below t in ascending order followed by direct. A finite gap equal
// to t - 1 is dropped in favour of direct when direct is enabled.
std::vector<int> valid_deltas(int t, const TrackerConfig& config);

struct ChainCandidate {
  int delta = kDirectDelta;
  FlowField flow;
  CostMap cost;
  OcclusionMap occlusion;
};

struct FrameResult {
  int frame = 1;  // tracker-local index
  FlowField flow;
  OcclusionMap occlusion;
  CostMap cost;
  Map2D<std::int32_t> delta_map;
};

// Per-pixel argmin of the selection score over `candidates`. Ties go to the
// earliest candidate.
FrameResult select(std::span<const ChainCandidate> candidates, const TrackerConfig& config);

// Maps tracker-local frame numbers (template = 1) onto sequence indices.
// Backward tracking from frame q uses {origin = q, direction = -1}.
struct TimeAxis {
  int origin = 1;
  int direction = 1;

  int to_global(int local) const { return origin + direction * (local - 1); }
};

class Tracker {
 public:
  Tracker(TrackerConfig config, std::shared_ptr<const FlowProvider> provider,
          std::shared_ptr<const quality::QualityEstimator> estimator, TimeAxis axis = {});

  // Frame t must be 1 on the first call (the template) and previous + 1 after.
  // Throws StateError otherwise.
  FrameResult step(int t, const Image& image);

  // Candidate for gap `delta` at frame t from the stored state.
  ChainCandidate build_candidate(int t, int delta, const Image& current) const;

  int current_frame() const { return t_; }
  const TrackerConfig& config() const { return config_; }
  const TimeAxis& axis() const { return axis_; }
  std::size_t stored_count() const { return stored_.size(); }
  bool is_stored(int t) const { return stored_.count(t) != 0; }

 private:
  TrackerConfig config_;
  std::shared_ptr<const FlowProvider> provider_;
  std::shared_ptr<const quality::QualityEstimator> estimator_;
  TimeAxis axis_;
  int t_ = 0;
  Image template_;
  std::map<int, FrameResult> stored_;
};

struct TrackSample {
  int frame = 1;
  Point2 position;
  bool occluded = false;
  float cost = 0.0f;
};

// Position, occlusion flag and cost of template point q in every result.
// Throws ArgumentError when q lies outside the frame.
std::vector<TrackSample> get_track(std::span<const FrameResult> results, Point2 q);

// Per result: fraction of pixels selecting each delta.
std::vector<std::map<int, double>> delta_histogram(std::span<const FrameResult> results);

}  // namespace mftiq
