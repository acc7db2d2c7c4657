#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "randpad/rng.hpp"
#include "randpad/tensor.hpp"

namespace randpad {

/// Zero-pad counts on each border of a feature map.
struct PaddingSpec {
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t top = 0;
  std::size_t bottom = 0;

  /// "l,r,t,b" as written to logs.
  std::string str() const;
  static PaddingSpec parse(const std::string& text);
  static PaddingSpec symmetric(std::size_t n) { return {n, n, n, n}; }

  friend bool operator==(const PaddingSpec&, const PaddingSpec&) = default;
};

/// The four half-border options, each padding one of (left, right) and one of
/// (top, bottom) by a single pixel. Columns are ordered (l, r, t, b).
inline constexpr std::array<std::array<std::size_t, 4>, 4> kPaddingOptions{{
    {1, 0, 1, 0},
    {1, 0, 0, 1},
    {0, 1, 1, 0},
    {0, 1, 0, 1},
}};

enum class Mode { train, eval };

/// One uniform draw: an index into kPaddingOptions.
std::size_t draw_padding_option(RngStream& rng);

/// Performs 2n uniform draws over kPaddingOptions and accumulates the chosen
/// rows. Throws InvalidArgument when n == 0.
PaddingSpec sample_padding_spec(std::size_t n, RngStream& rng);

/// Accumulates the given option-row draws; the sampling loop with the draws
/// supplied by the caller.
PaddingSpec accumulate_padding_options(std::span<const std::size_t> rows);

/// Zero-pads every plane of x by spec.
Tensor apply_pad(const Tensor& x, const PaddingSpec& spec);

/// Zero-pads sample i of x by specs[i]. All specs must give the same padded
/// extent.
Tensor apply_pad(const Tensor& x, std::span<const PaddingSpec> specs);

Tensor traditional_pad(const Tensor& x, std::size_t n);

/// Adjoint of apply_pad: drops gradient that landed on padded cells.
Tensor pad_backward(const Tensor& grad_out, const PaddingSpec& spec, std::size_t in_h,
                    std::size_t in_w);
Tensor pad_backward(const Tensor& grad_out, std::span<const PaddingSpec> specs, std::size_t in_h,
                    std::size_t in_w);

/// Random padding in train mode (one spec per sample, drawn from that
/// sample's stream), symmetric padding in eval mode (no draws).
std::pair<Tensor, std::vector<PaddingSpec>> pad_for_mode(const Tensor& x, std::size_t n, Mode mode,
                                                         std::span<RngStream> rngs);

}  // namespace randpad
