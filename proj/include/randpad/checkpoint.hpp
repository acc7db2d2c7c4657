#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "randpad/model.hpp"

namespace randpad {

inline constexpr char kCheckpointMagic[4] = {'R', 'P', 'L', 'B'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian layout:
///   "RPLB", u32 version, u32 count,
///   count x { u32 name_len, name bytes, u32 rank, rank x u32 extent, f32 values }.
std::vector<std::uint8_t> serialize_checkpoint(Model& model);

/// Copies every tensor of `bytes` into the matching model state. Throws
/// FormatError naming the byte offset on bad magic, version or truncation,
/// and on the first parameter whose name or shape disagrees with the model.
void deserialize_checkpoint(std::span<const std::uint8_t> bytes, Model& model);

void save_checkpoint(Model& model, const std::filesystem::path& path);
void load_checkpoint(const std::filesystem::path& path, Model& model);

}  // namespace randpad
