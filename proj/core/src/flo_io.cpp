#include "mftiq/flo_io.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "mftiq/file_io.hpp"

namespace mftiq {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }
float get_f32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return std::bit_cast<float>(get_u32(bytes, offset));
}

}  // namespace

std::vector<std::uint8_t> encode_flo(const FlowField& field) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + field.size() * 8);
  put_f32(out, kFloTag);
  put_u32(out, static_cast<std::uint32_t>(field.width()));
  put_u32(out, static_cast<std::uint32_t>(field.height()));
  for (const Vec2f& v : field.pixels()) {
    put_f32(out, v.x);
    put_f32(out, v.y);
  }
  return out;
}

FlowField decode_flo(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw LengthError(".flo: file shorter than the 4-byte tag");
  const float tag = get_f32(bytes, 0);
  if (tag != kFloTag) {
    std::ostringstream msg;
    msg << ".flo: bad sanity tag " << tag << " (expected 202021.25)";
    throw FormatError(msg.str());
  }
  if (bytes.size() < 12) throw LengthError(".flo: truncated header");
  const auto width = static_cast<std::int32_t>(get_u32(bytes, 4));
  const auto height = static_cast<std::int32_t>(get_u32(bytes, 8));
  if (width <= 0 || height <= 0) {
    throw FormatError(".flo: non-positive dimensions " + std::to_string(width) + "x" + std::to_string(height));
  }
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t expected = 12 + count * 8;
  if (bytes.size() < expected) {
    throw LengthError(".flo: payload has " + std::to_string(bytes.size() - 12) + " bytes, expected " +
                      std::to_string(count * 8));
  }
  FlowField field(width, height);
  for (std::size_t i = 0; i < count; ++i) {
    field[i] = {get_f32(bytes, 12 + 8 * i), get_f32(bytes, 16 + 8 * i)};
  }
  return field;
}

FlowField load_flo(const std::filesystem::path& path) {
  try {
    return decode_flo(read_file(path));
  } catch (const LengthError& e) {
    throw LengthError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_flo(const FlowField& field, const std::filesystem::path& path) {
  write_file_atomic(path, encode_flo(field));
}

}  // namespace mftiq
