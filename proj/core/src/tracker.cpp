#include "mftiq/tracker.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "mftiq/flow.hpp"
#include "mftiq/providers.hpp"
#include "mftiq/quality.hpp"

namespace mftiq {

void TrackerConfig::validate() const {
  if (deltas.empty() && !include_direct) throw ArgumentError("delta set is empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] < 1) throw ArgumentError("deltas must be positive, got " + std::to_string(deltas[i]));
    if (i > 0 && deltas[i] <= deltas[i - 1]) throw ArgumentError("deltas must be strictly ascending");
  }
  if (!include_direct && deltas.front() != 1) {
    throw ArgumentError("delta set needs 1 or direct to start tracking");
  }
  if (!(occlusion_penalty > 31.0)) throw ArgumentError("occlusion penalty must exceed 31");
  if (!(occlusion_threshold >= 0.0f && occlusion_threshold <= 1.0f)) {
    throw ArgumentError("occlusion threshold must lie in [0, 1]");
  }
}

int TrackerConfig::max_finite_delta() const { return deltas.empty() ? 0 : deltas.back(); }

void parse_deltas(std::string_view text, TrackerConfig& config) {
  std::vector<int> finite;
  bool direct = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(pos, end - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "direct") {
      direct = true;
    } else {
      int value = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
        throw ArgumentError("bad delta '" + std::string(item) + "'");
      }
      finite.push_back(value);
    }
    pos = end + 1;
  }
  std::sort(finite.begin(), finite.end());
  finite.erase(std::unique(finite.begin(), finite.end()), finite.end());
  TrackerConfig next = config;
  next.deltas = std::move(finite);
  next.include_direct = direct;
  next.validate();
  config = std::move(next);
}

std::string delta_name(int delta) { return delta == kDirectDelta ? "direct" : std::to_string(delta); }

std::string format_deltas(const TrackerConfig& config) {
  std::string out;
  for (int d : config.deltas) out += (out.empty() ? "" : ",") + std::to_string(d);
  if (config.include_direct) out += out.empty() ? "direct" : ",direct";
  return out;
}

SelectionMode parse_selection_mode(std::string_view text) {
  if (text == "soft") return SelectionMode::SoftPenalty;
  if (text == "hard") return SelectionMode::HardExclusion;
  throw ArgumentError("selection mode must be soft or hard, got '" + std::string(text) + "'");
}

std::string_view to_string(SelectionMode mode) { return mode == SelectionMode::SoftPenalty ? "soft" : "hard"; }

std::vector<int> valid_deltas(int t, const TrackerConfig& config) {
  if (t < 2) throw ArgumentError("valid_deltas: t must be >= 2, got " + std::to_string(t));
  std::vector<int> out;
  for (int d : config.deltas) {
    if (d >= t) break;
    if (d == t - 1 && config.include_direct) continue;
    out.push_back(d);
  }
  if (config.include_direct) out.push_back(kDirectDelta);
  return out;
}

FrameResult select(std::span<const ChainCandidate> candidates, const TrackerConfig& config) {
  if (candidates.empty()) throw ArgumentError("select: no candidates");
  const Resolution res = candidates.front().flow.resolution();
  for (const ChainCandidate& c : candidates) {
    require_same_shape(c.flow, candidates.front().flow, "select");
    require_same_shape(c.cost, c.flow, "select");
    require_same_shape(c.occlusion, c.flow, "select");
  }
  FrameResult out{0, FlowField(res), OcclusionMap(res), CostMap(res), Map2D<std::int32_t>(res)};
  const double m = config.occlusion_penalty;
  const float thr = config.occlusion_threshold;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.flow.size(); ++i) {
    std::size_t best = 0;
    double best_score = inf;
    bool any_visible = false;
    if (config.mode == SelectionMode::HardExclusion) {
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (candidates[k].occlusion[i] > thr) continue;
        const double s = candidates[k].cost[i];
        if (!any_visible || s < best_score) {
          best = k;
          best_score = s;
        }
        any_visible = true;
      }
    }
    if (!any_visible) {
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        const double s = candidates[k].cost[i] + (candidates[k].occlusion[i] > thr ? m : 0.0);
        if (k == 0 || s < best_score) {
          best = k;
          best_score = s;
        }
      }
    }
    const ChainCandidate& w = candidates[best];
    out.flow[i] = w.flow[i];
    out.occlusion[i] = w.occlusion[i];
    out.cost[i] = w.cost[i];
    out.delta_map[i] = w.delta;
  }
  return out;
}

Tracker::Tracker(TrackerConfig config, std::shared_ptr<const FlowProvider> provider,
                 std::shared_ptr<const quality::QualityEstimator> estimator, TimeAxis axis)
    : config_(std::move(config)), provider_(std::move(provider)), estimator_(std::move(estimator)), axis_(axis) {
  config_.validate();
  if (!provider_) throw ArgumentError("tracker: null flow provider");
  if (!estimator_) throw ArgumentError("tracker: null quality estimator");
  if (axis_.direction != 1 && axis_.direction != -1) throw ArgumentError("tracker: direction must be +1 or -1");
}

ChainCandidate Tracker::build_candidate(int t, int delta, const Image& current) const {
  ChainCandidate c;
  c.delta = delta;
  ValidityMask valid;
  if (delta == kDirectDelta) {
    c.flow = provider_->get_flow(axis_.to_global(1), axis_.to_global(t));
  } else {
    auto it = stored_.find(t - delta);
    if (delta < 1 || it == stored_.end()) {
      throw StateError("no stored result for frame " + std::to_string(t - delta) + " (t = " + std::to_string(t) +
                       ", delta = " + std::to_string(delta) + ")");
    }
    ChainedFlow chained = chain_flows(it->second.flow, provider_->get_flow(axis_.to_global(t - delta), axis_.to_global(t)));
    c.flow = std::move(chained.flow);
    valid = std::move(chained.valid);
  }
  require_same_shape(c.flow, template_, "flow provider");
  quality::QualityOutput q =
      estimator_->estimate(c.flow, FrameView{axis_.to_global(1), &template_}, FrameView{axis_.to_global(t), &current});
  require_same_shape(q.cost, c.flow, "quality estimator");
  require_same_shape(q.occlusion, c.flow, "quality estimator");
  c.cost = std::move(q.cost);
  c.occlusion = std::move(q.occlusion);

  const Resolution res = c.flow.resolution();
  for (int y = 0; y < res.height; ++y) {
    for (int x = 0; x < res.width; ++x) {
      const Vec2f d = c.flow(x, y);
      const bool lost = (!valid.empty() && !valid(x, y)) ||
                        !in_bounds(res, {x + static_cast<double>(d.x), y + static_cast<double>(d.y)});
      if (lost) c.occlusion(x, y) = 1.0f;
    }
  }
  return c;
}

FrameResult Tracker::step(int t, const Image& image) {
  if (t != t_ + 1) {
    throw StateError("frame " + std::to_string(t) + " out of order; expected " + std::to_string(t_ + 1));
  }
  if (image.empty()) throw DimensionError("tracker: empty frame");
  FrameResult result;
  if (t == 1) {
    template_ = image;
    const Resolution res = image.resolution();
    result = FrameResult{1, FlowField(res), OcclusionMap(res, 0.0f), CostMap(res, 0.0f),
                         Map2D<std::int32_t>(res, kDirectDelta)};
  } else {
    require_same_shape(image, template_, "tracker frame");
    std::vector<ChainCandidate> candidates;
    for (int d : valid_deltas(t, config_)) candidates.push_back(build_candidate(t, d, image));
    result = select(candidates, config_);
    result.frame = t;
  }
  t_ = t;
  const int keep_from = t + 1 - config_.max_finite_delta();
  if (config_.max_finite_delta() > 0) stored_.emplace(t, result);
  stored_.erase(stored_.begin(), stored_.lower_bound(keep_from));
  return result;
}

std::vector<TrackSample> get_track(std::span<const FrameResult> results, Point2 q) {
  std::vector<TrackSample> out;
  out.reserve(results.size());
  for (const FrameResult& r : results) {
    if (!in_bounds(r.flow.resolution(), q)) {
      throw ArgumentError("query (" + std::to_string(q.x) + ", " + std::to_string(q.y) + ") outside frame " +
                          to_string(r.flow.resolution()));
    }
    const Vec2f d = bilinear_sample(r.flow, q).value;
    out.push_back({r.frame, {q.x + d.x, q.y + d.y}, bilinear_sample(r.occlusion, q).value > kOcclusionThreshold,
                   bilinear_sample(r.cost, q).value});
  }
  return out;
}

std::vector<std::map<int, double>> delta_histogram(std::span<const FrameResult> results) {
  std::vector<std::map<int, double>> out;
  out.reserve(results.size());
  for (const FrameResult& r : results) {
    std::map<int, std::size_t> counts;
    for (std::int32_t d : r.delta_map.pixels()) ++counts[d];
    std::map<int, double> fractions;
    const double n = static_cast<double>(r.delta_map.size());
    for (const auto& [d, c] : counts) fractions[d] = static_cast<double>(c) / n;
    out.push_back(std::move(fractions));
  }
  return out;
}

}  // namespace mftiq
