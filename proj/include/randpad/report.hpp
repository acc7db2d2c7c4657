#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "randpad/probe.hpp"
#include "randpad/tensor.hpp"

namespace randpad {

/// Locale-independent fixed notation, '.' decimal separator.
std::string format_fixed(double v, int decimals = 6);

inline constexpr std::string_view kProbeCsvHeader = "encoder_id,padding,pattern,input_kind,spc,mae,seed";
std::string probe_csv_row(const ProbeResult& r);

/// Binary PGM (P5, maxval 255, row-major) of a single map (1, 1, H, W),
/// min-max scaled; a constant map encodes as mid-grey.
std::vector<std::uint8_t> encode_pgm(const Tensor& map);
void write_pgm(const std::filesystem::path& path, const Tensor& map);

void write_file(const std::filesystem::path& path, std::string_view contents);

/// Creates `dir` if needed; a directory that already has entries is refused
/// so earlier results are never overwritten.
void prepare_output_dir(const std::filesystem::path& dir);

}  // namespace randpad
