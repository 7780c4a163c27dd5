#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mftiq/map2d.hpp"

namespace mftiq {

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

using Gray8 = Map2D<std::uint8_t>;
using RgbImage = Map2D<Rgb8>;

void write_png(const std::filesystem::path& path, const Gray8& image);
void write_png(const std::filesystem::path& path, const RgbImage& image);
// Palette-indexed PNG; `palette` has at most 256 entries.
void write_png_indexed(const std::filesystem::path& path, const Gray8& indices, const std::vector<Rgb8>& palette);

// Color and palette inputs are converted to 8-bit gray / RGB by libpng.
Gray8 read_png_gray(const std::filesystem::path& path);
RgbImage read_png_rgb(const std::filesystem::path& path);
// Raw palette indices of an indexed PNG.
Gray8 read_png_indices(const std::filesystem::path& path);

// [0, 1] intensity <-> 8-bit.
Gray8 to_gray8(const Image& image);
Image to_image(const Gray8& gray);

// 0 / 255 for false / true.
Gray8 mask_to_gray8(const ValidityMask& mask);
// Probability quantized to round(255 O); binary maps become 0 / 255.
Gray8 occlusion_to_gray8(const OcclusionMap& occlusion);

}  // namespace mftiq
