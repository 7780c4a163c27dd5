#pragma once

#include "mftiq/map2d.hpp"

namespace mftiq {

template <typename T>
struct Sampled {
  T value{};
  // The query lay outside [0, W-1] x [0, H-1]; the value was interpolated at
  // the clamped position.
  bool out_of_bounds = false;
};

// Bilinear interpolation with border clamping. Exact at integer coordinates.
Sampled<float> bilinear_sample(const ScalarMap& map, Point2 p);
Sampled<Vec2f> bilinear_sample(const FlowField& field, Point2 p);

struct ChainedFlow {
  FlowField flow;
  // 0 where the intermediate position p + first[p] fell outside the image.
  ValidityMask valid;
};

// Composes A->B with B->C into A->C:
//   out[p] = first[p] + sample(second, p + first[p]).
ChainedFlow chain_flows(const FlowField& first, const FlowField& second);

// Resamples the field to (round(sx W), round(sy H)) and scales the vectors by
// (sx, sy). Output pixel centers map back with pixel-center alignment.
FlowField scale_flow(const FlowField& field, double sx, double sy);

// Per-pixel Euclidean norm of (pred - gt).
ScalarMap endpoint_error(const FlowField& pred, const FlowField& gt);

bool all_finite(const FlowField& field);

// True when p lies inside [0, W-1] x [0, H-1].
inline bool in_bounds(Resolution r, Point2 p) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= static_cast<double>(r.width - 1) &&
         p.y <= static_cast<double>(r.height - 1);
}

}  // namespace mftiq
