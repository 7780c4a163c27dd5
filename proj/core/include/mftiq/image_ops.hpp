#pragma once

#include "mftiq/map2d.hpp"

namespace mftiq {

// Averages non-overlapping factor x factor blocks. Output size is
// ceil(W / factor) x ceil(H / factor); partial border blocks average what they cover.
Image downsample_box(const Image& img, int factor);

struct Gradients {
  Image gx;
  Image gy;
};

// Central differences, one-sided at the borders.
Gradients central_gradients(const Image& img);

// Sum over the (2 radius + 1)^2 window centred at every pixel, truncated at the
// borders. Uses a double-precision summed-area table.
Image box_sum(const Image& img, int radius);

// Subtracts the (2 radius + 1)^2 local mean from every pixel.
Image subtract_local_mean(const Image& img, int radius);

// Backward warp: out[p] = sample(img, p + flow[p]).
Image warp_image(const Image& img, const Map2D<Vec2f>& flow);

}  // namespace mftiq
