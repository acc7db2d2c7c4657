#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "randpad/tensor.hpp"

namespace randpad {

/// Output extents and reduction size of an unpadded convolution.
struct ConvGeometry {
  std::size_t batch = 0;
  std::size_t in_channels = 0;
  std::size_t in_h = 0;
  std::size_t in_w = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t out_h = 0;
  std::size_t out_w = 0;

  std::size_t patch() const { return kernel * kernel * in_channels; }
  std::size_t positions() const { return out_h * out_w; }

  /// Validates x (N,Cin,H,W) against w (Cout,Cin,k,k); throws InvalidArgument.
  static ConvGeometry make(const Shape& x, const Shape& w, std::size_t bias_len,
                           std::size_t stride);
};

struct ConvGrads {
  Tensor grad_x;
  Tensor grad_w;
  std::vector<float> grad_b;
};

/// Cross-correlation with bias and no padding. Each output value accumulates
/// kernel row, then kernel column, then input channel, in that order, so the
/// result does not depend on the number of OpenMP threads.
Tensor conv2d(const Tensor& x, const Tensor& w, std::span<const float> b, std::size_t stride = 1);

ConvGrads conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& grad_out,
                          std::size_t stride = 1);

namespace reference {

/// Direct nested-loop convolution, single threaded. Kept as the baseline the
/// parallel kernels are tested and benchmarked against.
Tensor conv2d(const Tensor& x, const Tensor& w, std::span<const float> b, std::size_t stride = 1);

ConvGrads conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& grad_out,
                          std::size_t stride = 1);

}  // namespace reference

}  // namespace randpad
