#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mftiq/errors.hpp"

namespace mftiq {

// Sub-pixel image position. Pixel (row i, column j) has its center at (x=j, y=i);
// x grows rightwards, y downwards.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// Displacement stored in a flow field, in pixels.
struct Vec2f {
  float x = 0.0f;
  float y = 0.0f;

  friend bool operator==(const Vec2f&, const Vec2f&) = default;
};

struct Resolution {
  int width = 0;
  int height = 0;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

std::string to_string(Resolution r);

// Dense row-major 2D grid. All per-pixel maps of the library (flow, occlusion,
// cost, validity, images) are instances of this template.
template <typename T>
class Map2D {
 public:
  using value_type = T;

  Map2D() = default;
  Map2D(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw ArgumentError("negative map dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  explicit Map2D(Resolution r, T fill = T{}) : Map2D(r.width, r.height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  Resolution resolution() const { return {width_, height_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  friend bool operator==(const Map2D&, const Map2D&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using FlowField = Map2D<Vec2f>;
using ScalarMap = Map2D<float>;
// Occlusion probability in [0, 1]; > 0.5 means occluded or out of view.
using OcclusionMap = Map2D<float>;
// Non-negative matching cost in [0, 31]; low means accurate.
using CostMap = Map2D<float>;
// 1 = valid / in-bounds, 0 = invalid.
using ValidityMask = Map2D<std::uint8_t>;
// Grayscale intensity, nominally in [0, 1].
using Image = Map2D<float>;

inline constexpr float kOcclusionThreshold = 0.5f;

// A video frame together with its 1-based index in the sequence.
struct FrameView {
  int index = 0;
  const Image* image = nullptr;
};

template <typename A, typename B>
void require_same_shape(const Map2D<A>& a, const Map2D<B>& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionError(std::string(what) + ": resolution mismatch " +
                         to_string(a.resolution()) + " vs " + to_string(b.resolution()));
  }
}

}  // namespace mftiq
