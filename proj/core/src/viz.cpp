#include "mftiq/viz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace mftiq {

namespace {

using Color = std::array<double, 3>;

std::vector<Color> make_wheel() {
  constexpr int ry = 15, yg = 6, gc = 4, cb = 11, bm = 13, mr = 6;
  std::vector<Color> wheel;
  for (int i = 0; i < ry; ++i) wheel.push_back({255, 255.0 * i / ry, 0});
  for (int i = 0; i < yg; ++i) wheel.push_back({255 - 255.0 * i / yg, 255, 0});
  for (int i = 0; i < gc; ++i) wheel.push_back({0, 255, 255.0 * i / gc});
  for (int i = 0; i < cb; ++i) wheel.push_back({0, 255 - 255.0 * i / cb, 255});
  for (int i = 0; i < bm; ++i) wheel.push_back({255.0 * i / bm, 0, 255});
  for (int i = 0; i < mr; ++i) wheel.push_back({255, 0, 255 - 255.0 * i / mr});
  return wheel;
}

Rgb8 wheel_color(double u, double v) {
  static const std::vector<Color> wheel = make_wheel();
  const int n = static_cast<int>(wheel.size());
  const double rad = std::hypot(u, v);
  const double a = std::atan2(-v, -u) / std::numbers::pi;
  const double fk = (a + 1.0) / 2.0 * (n - 1);
  const int k0 = static_cast<int>(std::floor(fk));
  const int k1 = (k0 + 1) % n;
  const double f = fk - k0;
  std::array<std::uint8_t, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) {
    double col = ((1.0 - f) * wheel[static_cast<std::size_t>(k0)][c] + f * wheel[static_cast<std::size_t>(k1)][c]) / 255.0;
    col = rad <= 1.0 ? 1.0 - rad * (1.0 - col) : col * 0.75;
    out[c] = static_cast<std::uint8_t>(std::lround(std::clamp(col, 0.0, 1.0) * 255.0));
  }
  return {out[0], out[1], out[2]};
}

}  // namespace

RgbImage flow_to_color(const FlowField& flow, double max_magnitude) {
  if (max_magnitude < 0.0 || !std::isfinite(max_magnitude)) throw ArgumentError("flow_to_color: bad max magnitude");
  double scale = max_magnitude;
  if (scale == 0.0) {
    for (const Vec2f& d : flow.pixels()) scale = std::max(scale, std::hypot(double{d.x}, double{d.y}));
  }
  RgbImage out(flow.resolution());
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const double u = scale > 0.0 ? flow[i].x / scale : 0.0;
    const double v = scale > 0.0 ? flow[i].y / scale : 0.0;
    out[i] = wheel_color(u, v);
  }
  return out;
}

Rgb8 track_color(int track_id) {
  // golden-angle hue steps, full saturation
  const double h = std::fmod(track_id * 0.6180339887498949, 1.0) * 6.0;
  const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = 1, g = x; break;
    case 1: r = x, g = 1; break;
    case 2: g = 1, b = x; break;
    case 3: g = x, b = 1; break;
    case 4: r = x, b = 1; break;
    default: r = 1, b = x; break;
  }
  auto q = [](double c) { return static_cast<std::uint8_t>(std::lround(c * 255.0)); };
  return {q(r), q(g), q(b)};
}

RgbImage draw_tracks(const Image& frame, std::span<const TrackRow> rows) {
  RgbImage out(frame.resolution());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const auto g = static_cast<std::uint8_t>(std::lround(std::clamp(frame[i], 0.0f, 1.0f) * 255.0f));
    out[i] = {g, g, g};
  }
  for (const TrackRow& r : rows) {
    const int cx = static_cast<int>(std::lround(r.position.x));
    const int cy = static_cast<int>(std::lround(r.position.y));
    const Rgb8 color = track_color(r.track_id);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (r.occluded && dx == 0 && dy == 0) continue;
        if (out.contains(cx + dx, cy + dy)) out(cx + dx, cy + dy) = color;
      }
    }
  }
  return out;
}

}  // namespace mftiq
