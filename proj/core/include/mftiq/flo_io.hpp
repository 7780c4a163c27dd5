#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mftiq/map2d.hpp"

namespace mftiq {

// Middlebury .flo layout, little-endian regardless of host:
//   float32 tag 202021.25 | int32 width | int32 height | width*height*(dx, dy) float32, row-major.
inline constexpr float kFloTag = 202021.25f;

std::vector<std::uint8_t> encode_flo(const FlowField& field);
FlowField decode_flo(std::span<const std::uint8_t> bytes);

FlowField load_flo(const std::filesystem::path& path);
void save_flo(const FlowField& field, const std::filesystem::path& path);

}  // namespace mftiq
