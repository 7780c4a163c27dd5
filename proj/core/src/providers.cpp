#include "mftiq/providers.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/args.h>
#include <fmt/format.h>

#include "mftiq/flo_io.hpp"
#include "mftiq/flow.hpp"
#include "mftiq/image_ops.hpp"
#include "mftiq/synth.hpp"

namespace mftiq {

DirectoryProvider::DirectoryProvider(std::filesystem::path root, std::string pattern, Resolution resolution)
    : root_(std::move(root)), pattern_(std::move(pattern)), resolution_(resolution) {
  path_for(1, 2);  // validates the pattern early
}

std::filesystem::path DirectoryProvider::path_for(int a, int b) const {
  try {
    return root_ / fmt::format(fmt::runtime(pattern_), fmt::arg("a", a), fmt::arg("b", b));
  } catch (const fmt::format_error& e) {
    throw ArgumentError("flow file pattern '" + pattern_ + "': " + e.what());
  }
}

FlowField DirectoryProvider::get_flow(int a, int b) const {
  const std::filesystem::path path = path_for(a, b);
  if (!std::filesystem::exists(path)) {
    throw NotFoundError("no flow file for (" + std::to_string(a) + ", " + std::to_string(b) + "): " + path.string(),
                        a, b);
  }
  FlowField field = load_flo(path);
  if (resolution_.width > 0 && field.resolution() != resolution_) {
    throw DimensionError(path.string() + ": resolution " + to_string(field.resolution()) + ", expected " +
                         to_string(resolution_));
  }
  return field;
}

FlowField SyntheticProvider::get_flow(int a, int b) const { return synth::gt_flow(*seq_, a, b).flow; }

ProviderCapabilities SyntheticProvider::capabilities() const { return {0, seq_->resolution()}; }

namespace {

constexpr double kMinEigen = 1e-4;  // per window pixel, intensity^2
constexpr float kMaxStep = 1.0f;    // pixels per iteration
constexpr float kConverged = 0.01f;

// Solves one pyramid level in place. Each pixel translates its own window.
void refine_level(const Image& from, const Image& to, FlowField& flow, int window, int iterations) {
  const int radius = window / 2;
  const int w = from.width(), h = from.height();
  const Gradients g = central_gradients(from);
  Image gxx(from.resolution()), gxy(from.resolution()), gyy(from.resolution());
  for (std::size_t i = 0; i < from.size(); ++i) {
    gxx[i] = g.gx[i] * g.gx[i];
    gxy[i] = g.gx[i] * g.gy[i];
    gyy[i] = g.gy[i] * g.gy[i];
  }
  const Image sxx = box_sum(gxx, radius);
  const Image sxy = box_sum(gxy, radius);
  const Image syy = box_sum(gyy, radius);
  const double min_eigen = kMinEigen * window * window;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a = sxx(x, y), b = sxy(x, y), d = syy(x, y);
      const double det = a * d - b * b;
      const double half_trace = 0.5 * (a + d);
      const double lambda_min = half_trace - std::sqrt(std::max(0.0, half_trace * half_trace - det));
      if (lambda_min < min_eigen) continue;
      Vec2f& u = flow(x, y);
      const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      for (int it = 0; it < iterations; ++it) {
        double bx = 0.0, by = 0.0;
        for (int qy = y0; qy <= y1; ++qy) {
          for (int qx = x0; qx <= x1; ++qx) {
            const double residual =
                bilinear_sample(to, {qx + static_cast<double>(u.x), qy + static_cast<double>(u.y)}).value -
                from(qx, qy);
            bx += g.gx(qx, qy) * residual;
            by += g.gy(qx, qy) * residual;
          }
        }
        const float ux = std::clamp(static_cast<float>(-(d * bx - b * by) / det), -kMaxStep, kMaxStep);
        const float uy = std::clamp(static_cast<float>(-(-b * bx + a * by) / det), -kMaxStep, kMaxStep);
        u.x += ux;
        u.y += uy;
        if (std::abs(ux) < kConverged && std::abs(uy) < kConverged) break;
      }
    }
  }
}

// Component-wise 3x3 median; removes isolated failures before upsampling.
FlowField median3(const FlowField& flow) {
  FlowField out(flow.resolution());
  const int w = flow.width(), h = flow.height();
  std::array<float, 9> xs{}, ys{};
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::size_t n = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = std::clamp(r + dr, 0, h - 1), cc = std::clamp(c + dc, 0, w - 1);
          xs[n] = flow(cc, rr).x;
          ys[n] = flow(cc, rr).y;
          ++n;
        }
      }
      std::nth_element(xs.begin(), xs.begin() + 4, xs.end());
      std::nth_element(ys.begin(), ys.begin() + 4, ys.end());
      out(c, r) = {xs[4], ys[4]};
    }
  }
  return out;
}

}  // namespace

FlowField classical_flow(const Image& from, const Image& to, const ClassicalFlowParams& params) {
  require_same_shape(from, to, "classical_flow");
  if (from.empty()) throw DimensionError("classical_flow: empty images");
  if (params.window < 3) throw ArgumentError("classical_flow: window must be >= 3");
  if (params.levels < 1) throw ArgumentError("classical_flow: levels must be >= 1");
  if (params.iterations < 0) throw ArgumentError("classical_flow: iterations must be >= 0");

  std::vector<Image> pyr_from{from}, pyr_to{to};
  while (static_cast<int>(pyr_from.size()) < params.levels &&
         std::min(pyr_from.back().width(), pyr_from.back().height()) >= 4 * params.window) {
    pyr_from.push_back(downsample_box(pyr_from.back(), 2));
    pyr_to.push_back(downsample_box(pyr_to.back(), 2));
  }

  FlowField flow(pyr_from.back().resolution());
  for (int level = static_cast<int>(pyr_from.size()) - 1; level >= 0; --level) {
    const Image& f = pyr_from[static_cast<std::size_t>(level)];
    if (flow.resolution() != f.resolution()) {
      flow = scale_flow(flow, static_cast<double>(f.width()) / flow.width(),
                        static_cast<double>(f.height()) / flow.height());
    }
    refine_level(f, pyr_to[static_cast<std::size_t>(level)], flow, params.window, params.iterations);
    flow = median3(flow);
  }
  return flow;
}

ClassicalProvider::ClassicalProvider(std::vector<Image> frames, ClassicalFlowParams params)
    : frames_(std::move(frames)), params_(params) {
  if (frames_.empty()) throw ArgumentError("ClassicalProvider: no frames");
  for (const Image& f : frames_) require_same_shape(f, frames_.front(), "ClassicalProvider");
  if (params_.window < 3) throw ArgumentError("classical_flow: window must be >= 3");
}

FlowField ClassicalProvider::get_flow(int a, int b) const {
  const int n = static_cast<int>(frames_.size());
  if (a < 1 || b < 1 || a > n || b > n) {
    throw IndexError("classical provider: frame pair (" + std::to_string(a) + ", " + std::to_string(b) +
                     ") outside [1, " + std::to_string(n) + "]");
  }
  if (a == b) return FlowField(frames_.front().resolution());
  return classical_flow(frames_[static_cast<std::size_t>(a - 1)], frames_[static_cast<std::size_t>(b - 1)], params_);
}

ProviderCapabilities ClassicalProvider::capabilities() const { return {0, frames_.front().resolution()}; }

std::string ClassicalProvider::id() const {
  return "classical:l" + std::to_string(params_.levels) + ":w" + std::to_string(params_.window) + ":i" +
         std::to_string(params_.iterations);
}

CachedProvider::CachedProvider(std::shared_ptr<const FlowProvider> inner, std::size_t capacity)
    : inner_(std::move(inner)), capacity_(capacity) {
  if (!inner_) throw ArgumentError("cached: null provider");
}

FlowField CachedProvider::get_flow(int a, int b) const {
  const Key key{inner_->id(), a, b};
  std::lock_guard lock(mutex_);
  if (auto it = index_.find(key); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    ++hits_;
    return *it->second->field;
  }
  ++misses_;
  auto field = std::make_shared<const FlowField>(inner_->get_flow(a, b));
  lru_.push_front({key, field});
  index_[key] = lru_.begin();
  if (capacity_ > 0 && lru_.size() > capacity_) {
    index_.erase(lru_.back().key);
    lru_.pop_back();
  }
  return *field;
}

std::size_t CachedProvider::size() const {
  std::lock_guard lock(mutex_);
  return lru_.size();
}

std::shared_ptr<CachedProvider> cached(std::shared_ptr<const FlowProvider> provider, std::size_t capacity) {
  return std::make_shared<CachedProvider>(std::move(provider), capacity);
}

}  // namespace mftiq
