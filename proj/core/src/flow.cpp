#include "mftiq/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mftiq {

std::string to_string(Resolution r) {
  return std::to_string(r.width) + "x" + std::to_string(r.height);
}

namespace {

struct Stencil {
  int x0, y0, x1, y1;
  double fx, fy;
  bool out_of_bounds;
};

Stencil make_stencil(Resolution r, Point2 p) {
  if (r.width <= 0 || r.height <= 0) {
    throw DimensionError("bilinear_sample: empty map");
  }
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw ArgumentError("bilinear_sample: non-finite sample position");
  }
  const double max_x = static_cast<double>(r.width - 1);
  const double max_y = static_cast<double>(r.height - 1);
  Stencil s{};
  s.out_of_bounds = p.x < 0.0 || p.y < 0.0 || p.x > max_x || p.y > max_y;
  const double cx = std::clamp(p.x, 0.0, max_x);
  const double cy = std::clamp(p.y, 0.0, max_y);
  s.x0 = static_cast<int>(std::floor(cx));
  s.y0 = static_cast<int>(std::floor(cy));
  s.x1 = std::min(s.x0 + 1, r.width - 1);
  s.y1 = std::min(s.y0 + 1, r.height - 1);
  s.fx = cx - s.x0;
  s.fy = cy - s.y0;
  return s;
}

template <typename Get>
double interpolate(const Stencil& s, Get&& get) {
  const double top = (1.0 - s.fx) * get(s.x0, s.y0) + s.fx * get(s.x1, s.y0);
  const double bottom = (1.0 - s.fx) * get(s.x0, s.y1) + s.fx * get(s.x1, s.y1);
  return (1.0 - s.fy) * top + s.fy * bottom;
}

struct SampledVec {
  double x, y;
  bool out_of_bounds;
};

SampledVec sample_vec(const FlowField& f, Point2 p) {
  const Stencil s = make_stencil(f.resolution(), p);
  return {interpolate(s, [&](int x, int y) { return static_cast<double>(f(x, y).x); }),
          interpolate(s, [&](int x, int y) { return static_cast<double>(f(x, y).y); }),
          s.out_of_bounds};
}

}  // namespace

Sampled<float> bilinear_sample(const ScalarMap& map, Point2 p) {
  const Stencil s = make_stencil(map.resolution(), p);
  const double v = interpolate(s, [&](int x, int y) { return static_cast<double>(map(x, y)); });
  return {static_cast<float>(v), s.out_of_bounds};
}

Sampled<Vec2f> bilinear_sample(const FlowField& field, Point2 p) {
  const SampledVec v = sample_vec(field, p);
  return {{static_cast<float>(v.x), static_cast<float>(v.y)}, v.out_of_bounds};
}

ChainedFlow chain_flows(const FlowField& first, const FlowField& second) {
  require_same_shape(first, second, "chain_flows");
  ChainedFlow out{FlowField(first.resolution()), ValidityMask(first.resolution(), 1)};
  for (int y = 0; y < first.height(); ++y) {
    for (int x = 0; x < first.width(); ++x) {
      const Vec2f d = first(x, y);
      const SampledVec s = sample_vec(second, {x + static_cast<double>(d.x), y + static_cast<double>(d.y)});
      out.flow(x, y) = {static_cast<float>(static_cast<double>(d.x) + s.x),
                        static_cast<float>(static_cast<double>(d.y) + s.y)};
      if (s.out_of_bounds) out.valid(x, y) = 0;
    }
  }
  return out;
}

FlowField scale_flow(const FlowField& field, double sx, double sy) {
  if (!(sx > 0.0) || !(sy > 0.0)) {
    throw ArgumentError("scale_flow: scale factors must be positive");
  }
  if (field.empty()) {
    throw DimensionError("scale_flow: empty field");
  }
  const int w = std::max(1, static_cast<int>(std::lround(sx * field.width())));
  const int h = std::max(1, static_cast<int>(std::lround(sy * field.height())));
  if (w == field.width() && h == field.height() && sx == 1.0 && sy == 1.0) {
    return field;
  }
  FlowField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Point2 src{(x + 0.5) / sx - 0.5, (y + 0.5) / sy - 0.5};
      const SampledVec v = sample_vec(field, src);
      out(x, y) = {static_cast<float>(v.x * sx), static_cast<float>(v.y * sy)};
    }
  }
  return out;
}

ScalarMap endpoint_error(const FlowField& pred, const FlowField& gt) {
  require_same_shape(pred, gt, "endpoint_error");
  ScalarMap out(pred.resolution());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = static_cast<double>(pred[i].x) - gt[i].x;
    const double dy = static_cast<double>(pred[i].y) - gt[i].y;
    out[i] = static_cast<float>(std::hypot(dx, dy));
  }
  return out;
}

bool all_finite(const FlowField& field) {
  return std::all_of(field.pixels().begin(), field.pixels().end(),
                     [](Vec2f v) { return std::isfinite(v.x) && std::isfinite(v.y); });
}

}  // namespace mftiq
