#pragma once

#include <span>

#include "mftiq/map2d.hpp"
#include "mftiq/png_io.hpp"
#include "mftiq/track.hpp"

namespace mftiq {

// Middlebury color wheel: hue encodes direction, saturation the magnitude
// relative to `max_magnitude` (0 = largest magnitude in the field). Zero flow
// is white.
RgbImage flow_to_color(const FlowField& flow, double max_magnitude = 0.0);

// Distinct color per track id.
Rgb8 track_color(int track_id);

// Gray frame with a 3x3 dot at the rounded position of every visible row;
// occluded rows are drawn as a hollow 3x3 ring.
RgbImage draw_tracks(const Image& frame, std::span<const TrackRow> rows);

}  // namespace mftiq
