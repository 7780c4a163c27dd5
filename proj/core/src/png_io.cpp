#include "mftiq/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

#include <png.h>

#include "mftiq/file_io.hpp"

namespace mftiq {

namespace {

struct WriteBuffer {
  std::vector<std::uint8_t> bytes;
};

void on_write(png_structp png, png_bytep data, png_size_t length) {
  auto* buf = static_cast<WriteBuffer*>(png_get_io_ptr(png));
  buf->bytes.insert(buf->bytes.end(), data, data + length);
}

void on_flush(png_structp) {}

struct ReadBuffer {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset = 0;
};

void on_read(png_structp png, png_bytep data, png_size_t length) {
  auto* buf = static_cast<ReadBuffer*>(png_get_io_ptr(png));
  if (buf->offset + length > buf->bytes->size()) png_error(png, "truncated PNG");
  std::memcpy(data, buf->bytes->data() + buf->offset, length);
  buf->offset += length;
}

void on_error(png_structp png, png_const_charp message) {
  auto* msg = static_cast<std::string*>(png_get_error_ptr(png));
  if (msg) *msg = message;
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

// Rows are `row_bytes` wide, `height` tall, packed contiguously.
std::vector<std::uint8_t> encode(int width, int height, int color_type, const std::uint8_t* pixels,
                                 std::size_t row_bytes, const std::vector<Rgb8>* palette) {
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_error, on_warning);
  if (!png) throw IoError("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  WriteBuffer buffer;
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  std::vector<png_color> colors;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png encode failed: " + error);
  }
  png_set_write_fn(png, &buffer, on_write, on_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (palette) {
    for (const Rgb8& c : *palette) colors.push_back({c.r, c.g, c.b});
    png_set_PLTE(png, info, colors.data(), static_cast<int>(colors.size()));
  }
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(pixels + static_cast<std::size_t>(y) * row_bytes);
  }
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return std::move(buffer.bytes);
}

enum class ReadMode { Gray, Rgb, Indices };

struct Decoded {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

Decoded decode(const std::filesystem::path& path, ReadMode mode) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw FormatError(path.string() + ": not a PNG file");
  }
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_error, on_warning);
  if (!png) throw IoError("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  ReadBuffer buffer{&bytes, 0};
  Decoded out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": " + error);
  }
  png_set_read_fn(png, &buffer, on_read);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (mode == ReadMode::Indices) {
    if (color_type != PNG_COLOR_TYPE_PALETTE) png_error(png, "not a palette-indexed PNG");
    if (bit_depth < 8) png_set_packing(png);
  } else {
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    const bool is_gray = color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA;
    if (mode == ReadMode::Gray && !is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (mode == ReadMode::Rgb && is_gray) png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out.pixels.resize(row_bytes * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = out.pixels.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

void write_png(const std::filesystem::path& path, const Gray8& image) {
  write_file_atomic(path, encode(image.width(), image.height(), PNG_COLOR_TYPE_GRAY, image.pixels().data(),
                                 static_cast<std::size_t>(image.width()), nullptr));
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  static_assert(sizeof(Rgb8) == 3);
  write_file_atomic(path, encode(image.width(), image.height(), PNG_COLOR_TYPE_RGB,
                                 reinterpret_cast<const std::uint8_t*>(image.pixels().data()),
                                 static_cast<std::size_t>(image.width()) * 3, nullptr));
}

void write_png_indexed(const std::filesystem::path& path, const Gray8& indices, const std::vector<Rgb8>& palette) {
  if (palette.empty() || palette.size() > 256) throw ArgumentError("png: palette must have 1..256 entries");
  for (std::uint8_t i : indices.pixels()) {
    if (i >= palette.size()) throw ArgumentError("png: index " + std::to_string(i) + " outside palette");
  }
  write_file_atomic(path, encode(indices.width(), indices.height(), PNG_COLOR_TYPE_PALETTE,
                                 indices.pixels().data(), static_cast<std::size_t>(indices.width()), &palette));
}

Gray8 read_png_gray(const std::filesystem::path& path) {
  Decoded d = decode(path, ReadMode::Gray);
  Gray8 out(d.width, d.height);
  std::copy(d.pixels.begin(), d.pixels.end(), out.pixels().begin());
  return out;
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  Decoded d = decode(path, ReadMode::Rgb);
  RgbImage out(d.width, d.height);
  std::memcpy(out.pixels().data(), d.pixels.data(), d.pixels.size());
  return out;
}

Gray8 read_png_indices(const std::filesystem::path& path) {
  Decoded d = decode(path, ReadMode::Indices);
  Gray8 out(d.width, d.height);
  std::copy(d.pixels.begin(), d.pixels.end(), out.pixels().begin());
  return out;
}

Gray8 to_gray8(const Image& image) {
  Gray8 out(image.resolution());
  for (std::size_t i = 0; i < image.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(image[i], 0.0f, 1.0f) * 255.0f));
  }
  return out;
}

Image to_image(const Gray8& gray) {
  Image out(gray.resolution());
  for (std::size_t i = 0; i < gray.size(); ++i) out[i] = static_cast<float>(gray[i]) / 255.0f;
  return out;
}

Gray8 mask_to_gray8(const ValidityMask& mask) {
  Gray8 out(mask.resolution());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 255 : 0;
  return out;
}

Gray8 occlusion_to_gray8(const OcclusionMap& occlusion) {
  Gray8 out(occlusion.resolution());
  for (std::size_t i = 0; i < occlusion.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(occlusion[i], 0.0f, 1.0f) * 255.0f));
  }
  return out;
}

}  // namespace mftiq
