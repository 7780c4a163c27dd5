#include "mftiq/image_ops.hpp"

#include <algorithm>
#include <vector>

#include "mftiq/flow.hpp"

namespace mftiq {

Image downsample_box(const Image& img, int factor) {
  if (factor < 1) throw ArgumentError("downsample_box: factor must be >= 1");
  if (img.empty()) throw DimensionError("downsample_box: empty image");
  if (factor == 1) return img;
  const int w = (img.width() + factor - 1) / factor;
  const int h = (img.height() + factor - 1) / factor;
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int yy = y * factor; yy < std::min((y + 1) * factor, img.height()); ++yy) {
        for (int xx = x * factor; xx < std::min((x + 1) * factor, img.width()); ++xx) {
          sum += img(xx, yy);
          ++n;
        }
      }
      out(x, y) = static_cast<float>(sum / n);
    }
  }
  return out;
}

Gradients central_gradients(const Image& img) {
  Gradients g{Image(img.resolution()), Image(img.resolution())};
  const int w = img.width();
  const int h = img.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
      const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
      g.gx(x, y) = xr > xl ? (img(xr, y) - img(xl, y)) / static_cast<float>(xr - xl) : 0.0f;
      g.gy(x, y) = yd > yu ? (img(x, yd) - img(x, yu)) / static_cast<float>(yd - yu) : 0.0f;
    }
  }
  return g;
}

Image box_sum(const Image& img, int radius) {
  const int w = img.width();
  const int h = img.height();
  std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  auto at = [&](int x, int y) -> double& { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      row += img(x, y);
      at(x + 1, y + 1) = at(x + 1, y) + row;
    }
  }
  Image out(img.resolution());
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(y - radius, 0), y1 = std::min(y + radius + 1, h);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(x - radius, 0), x1 = std::min(x + radius + 1, w);
      out(x, y) = static_cast<float>(at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0));
    }
  }
  return out;
}

Image subtract_local_mean(const Image& img, int radius) {
  const Image sums = box_sum(img, radius);
  Image ones(img.resolution(), 1.0f);
  const Image counts = box_sum(ones, radius);
  Image out(img.resolution());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i] - sums[i] / counts[i];
  return out;
}

Image warp_image(const Image& img, const Map2D<Vec2f>& flow) {
  require_same_shape(img, flow, "warp_image");
  Image out(img.resolution());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Vec2f d = flow(x, y);
      out(x, y) = bilinear_sample(img, {x + static_cast<double>(d.x), y + static_cast<double>(d.y)}).value;
    }
  }
  return out;
}

}  // namespace mftiq
