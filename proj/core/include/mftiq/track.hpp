#pragma once

#include <array>

#include "mftiq/map2d.hpp"

namespace mftiq {

// One frame of a point trajectory.
struct TrackPoint {
  Point2 position;
  bool visible = true;

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

// One row of the track text format.
struct TrackRow {
  int track_id = 0;
  int frame = 0;
  Point2 position;
  bool occluded = false;
  float cost = 0.0f;

  friend bool operator==(const TrackRow&, const TrackRow&) = default;
};

// Four control points (or the corners of a quadrilateral) of one frame.
using Quad = std::array<Point2, 4>;

}  // namespace mftiq
