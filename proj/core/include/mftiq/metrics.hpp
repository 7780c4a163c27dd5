#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mftiq/map2d.hpp"
#include "mftiq/track.hpp"

namespace mftiq::metrics {

// Pixel thresholds at 256 x 256 evaluation resolution. A point is "within"
// a threshold when its distance is strictly smaller.
inline constexpr std::array<double, 5> kThresholds{1.0, 2.0, 4.0, 8.0, 16.0};
inline constexpr double kEvalSize = 256.0;

Point2 rescale_to_256(Point2 p, Resolution source);

// One evaluated (track, frame) pair; positions in source resolution.
struct ScoredPoint {
  TrackPoint pred;
  TrackPoint gt;
};

struct ThresholdScores {
  std::array<double, kThresholds.size()> per_threshold{};
  double average = 0.0;
};

// Percentage of GT-visible points predicted within each threshold.
// Throws UndefinedMetricError when no GT point is visible.
ThresholdScores position_accuracy(std::span<const ScoredPoint> points, Resolution source);

// Percentage of pairs whose predicted visibility equals the GT visibility.
double occlusion_accuracy(std::span<const ScoredPoint> points);

// Jaccard TP / (TP + FP + FN) per threshold, in percent. A threshold with no
// positives at all scores 100.
ThresholdScores average_jaccard(std::span<const ScoredPoint> points, Resolution source);

struct Report {
  ThresholdScores position;
  double occlusion_accuracy = 0.0;
  ThresholdScores jaccard;
  std::size_t pairs = 0;
  std::size_t queries = 0;
};

Report evaluate(std::span<const ScoredPoint> points, Resolution source);

enum class QueryMode { First, Strided };
enum class Direction { Forward, Backward };

QueryMode parse_query_mode(std::string_view text);

struct EvalQuery {
  int track_id = 0;
  int frame = 1;
  Point2 point;
  Direction direction = Direction::Forward;

  friend bool operator==(const EvalQuery&, const EvalQuery&) = default;
};

// GT tracks indexed by track id; element f - 1 holds frame f.
using GroundTruthTracks = std::vector<std::vector<TrackPoint>>;

// first: one forward query per track at its first visible frame.
// strided: at frames 1, 1 + stride, ... a forward and a backward query per
// visible track, without backward queries at frame 1 or forward ones at the
// last frame. Output is ordered by frame, then track, forward before backward.
std::vector<EvalQuery> make_queries(const GroundTruthTracks& gt, QueryMode mode, int stride = 5);

// Predictions of query i, keyed by frame.
using QueryPredictions = std::map<int, std::map<int, TrackPoint>>;

// Pairs every frame after (forward) or before (backward) the query frame with
// the GT of the query's track. The query frame itself is not scored. Throws
// FormatError when a prediction is missing.
std::vector<ScoredPoint> pair_queries(std::span<const EvalQuery> queries, const GroundTruthTracks& gt,
                                      const QueryPredictions& predictions);

enum class AlignmentAggregate { Mean, Max };

// Distance between corresponding control points, aggregated over the four.
double alignment_error(const Quad& pred, const Quad& gt, AlignmentAggregate aggregate = AlignmentAggregate::Mean);

// Percentage of frames with alignment error <= threshold. When `rescale` is
// set both sides are first mapped to 256 x 256.
double pot_success(std::span<const Quad> pred, std::span<const Quad> gt, double threshold = 5.0,
                   AlignmentAggregate aggregate = AlignmentAggregate::Mean,
                   std::optional<Resolution> rescale = std::nullopt);

}  // namespace mftiq::metrics
