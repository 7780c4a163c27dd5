#include "mftiq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

namespace mftiq::metrics {

namespace {

constexpr std::size_t kNumThresholds = kThresholds.size();

double scaled_distance(const ScoredPoint& s, Resolution source) {
  const Point2 a = rescale_to_256(s.pred.position, source);
  const Point2 b = rescale_to_256(s.gt.position, source);
  return std::hypot(a.x - b.x, a.y - b.y);
}

void finish(ThresholdScores& scores) {
  double sum = 0.0;
  for (double v : scores.per_threshold) sum += v;
  scores.average = sum / static_cast<double>(kNumThresholds);
}

bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

Point2 rescale_to_256(Point2 p, Resolution source) {
  if (source.width <= 0 || source.height <= 0) {
    throw ArgumentError("rescale_to_256: bad source resolution " + to_string(source));
  }
  return {p.x * kEvalSize / source.width, p.y * kEvalSize / source.height};
}

ThresholdScores position_accuracy(std::span<const ScoredPoint> points, Resolution source) {
  std::array<std::size_t, kNumThresholds> hits{};
  std::size_t visible = 0;
  for (const ScoredPoint& s : points) {
    if (!s.gt.visible) continue;
    ++visible;
    const double d = scaled_distance(s, source);
    for (std::size_t k = 0; k < kNumThresholds; ++k) hits[k] += d < kThresholds[k] ? 1 : 0;
  }
  if (visible == 0) throw UndefinedMetricError("position accuracy: no visible ground-truth points");
  ThresholdScores out;
  for (std::size_t k = 0; k < kNumThresholds; ++k) {
    out.per_threshold[k] = 100.0 * static_cast<double>(hits[k]) / static_cast<double>(visible);
  }
  finish(out);
  return out;
}

double occlusion_accuracy(std::span<const ScoredPoint> points) {
  if (points.empty()) throw UndefinedMetricError("occlusion accuracy: no evaluated points");
  std::size_t agree = 0;
  for (const ScoredPoint& s : points) agree += s.pred.visible == s.gt.visible ? 1 : 0;
  return 100.0 * static_cast<double>(agree) / static_cast<double>(points.size());
}

ThresholdScores average_jaccard(std::span<const ScoredPoint> points, Resolution source) {
  std::array<std::size_t, kNumThresholds> tp{}, fp{}, fn{};
  for (const ScoredPoint& s : points) {
    const double d = scaled_distance(s, source);
    for (std::size_t k = 0; k < kNumThresholds; ++k) {
      const bool within = d < kThresholds[k];
      if (s.pred.visible && s.gt.visible && within) ++tp[k];
      if (s.pred.visible && (!s.gt.visible || !within)) ++fp[k];
      if (s.gt.visible && (!s.pred.visible || !within)) ++fn[k];
    }
  }
  ThresholdScores out;
  for (std::size_t k = 0; k < kNumThresholds; ++k) {
    const std::size_t denom = tp[k] + fp[k] + fn[k];
    if (denom == 0) {
      spdlog::warn("average jaccard: no positives at threshold {}px, counting it as 100", kThresholds[k]);
      out.per_threshold[k] = 100.0;
    } else {
      out.per_threshold[k] = 100.0 * static_cast<double>(tp[k]) / static_cast<double>(denom);
    }
  }
  finish(out);
  return out;
}

Report evaluate(std::span<const ScoredPoint> points, Resolution source) {
  Report r;
  r.position = position_accuracy(points, source);
  r.occlusion_accuracy = occlusion_accuracy(points);
  r.jaccard = average_jaccard(points, source);
  r.pairs = points.size();
  return r;
}

QueryMode parse_query_mode(std::string_view text) {
  if (text == "first") return QueryMode::First;
  if (text == "strided") return QueryMode::Strided;
  throw ArgumentError("query mode must be first or strided, got '" + std::string(text) + "'");
}

std::vector<EvalQuery> make_queries(const GroundTruthTracks& gt, QueryMode mode, int stride) {
  if (stride < 1) throw ArgumentError("make_queries: stride must be >= 1");
  std::vector<EvalQuery> out;
  if (mode == QueryMode::First) {
    for (std::size_t id = 0; id < gt.size(); ++id) {
      const auto& track = gt[id];
      for (std::size_t f = 0; f < track.size(); ++f) {
        if (track[f].visible) {
          out.push_back({static_cast<int>(id), static_cast<int>(f) + 1, track[f].position, Direction::Forward});
          break;
        }
      }
    }
    return out;
  }
  std::size_t frames = 0;
  for (const auto& track : gt) frames = std::max(frames, track.size());
  const int last = static_cast<int>(frames);
  for (int f = 1; f <= last; f += stride) {
    for (std::size_t id = 0; id < gt.size(); ++id) {
      const auto& track = gt[id];
      if (static_cast<std::size_t>(f) > track.size() || !track[static_cast<std::size_t>(f - 1)].visible) continue;
      const Point2 p = track[static_cast<std::size_t>(f - 1)].position;
      if (f < static_cast<int>(track.size())) out.push_back({static_cast<int>(id), f, p, Direction::Forward});
      if (f > 1) out.push_back({static_cast<int>(id), f, p, Direction::Backward});
    }
  }
  return out;
}

std::vector<ScoredPoint> pair_queries(std::span<const EvalQuery> queries, const GroundTruthTracks& gt,
                                      const QueryPredictions& predictions) {
  std::vector<ScoredPoint> out;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const EvalQuery& q = queries[qi];
    if (q.track_id < 0 || static_cast<std::size_t>(q.track_id) >= gt.size()) {
      throw IndexError("query " + std::to_string(qi) + " refers to unknown track " + std::to_string(q.track_id));
    }
    const auto& track = gt[static_cast<std::size_t>(q.track_id)];
    const int n = static_cast<int>(track.size());
    auto it = predictions.find(static_cast<int>(qi));
    const int step = q.direction == Direction::Forward ? 1 : -1;
    for (int f = q.frame + step; f >= 1 && f <= n; f += step) {
      const std::map<int, TrackPoint>* rows = it == predictions.end() ? nullptr : &it->second;
      auto row = rows ? rows->find(f) : std::map<int, TrackPoint>::const_iterator{};
      if (!rows || row == rows->end()) {
        throw FormatError("missing prediction for query " + std::to_string(qi) + " at frame " + std::to_string(f));
      }
      out.push_back({row->second, track[static_cast<std::size_t>(f - 1)]});
    }
  }
  return out;
}

double alignment_error(const Quad& pred, const Quad& gt, AlignmentAggregate aggregate) {
  double sum = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!finite(pred[i]) || !finite(gt[i])) throw ArgumentError("alignment_error: non-finite control point");
    const double d = std::hypot(pred[i].x - gt[i].x, pred[i].y - gt[i].y);
    sum += d;
    worst = std::max(worst, d);
  }
  return aggregate == AlignmentAggregate::Mean ? sum / static_cast<double>(pred.size()) : worst;
}

double pot_success(std::span<const Quad> pred, std::span<const Quad> gt, double threshold, AlignmentAggregate aggregate,
                   std::optional<Resolution> rescale) {
  if (pred.size() != gt.size()) {
    throw DimensionError("pot_success: " + std::to_string(pred.size()) + " predicted frames vs " +
                         std::to_string(gt.size()) + " ground-truth frames");
  }
  if (pred.empty()) throw UndefinedMetricError("pot_success: no frames");
  std::size_t ok = 0;
  for (std::size_t f = 0; f < pred.size(); ++f) {
    Quad a = pred[f], b = gt[f];
    if (rescale) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rescale_to_256(a[i], *rescale);
        b[i] = rescale_to_256(b[i], *rescale);
      }
    }
    ok += alignment_error(a, b, aggregate) <= threshold ? 1 : 0;
  }
  return 100.0 * static_cast<double>(ok) / static_cast<double>(pred.size());
}

}  // namespace mftiq::metrics
