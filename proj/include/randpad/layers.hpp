#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "randpad/tensor.hpp"

namespace randpad {

Tensor relu_forward(const Tensor& x);
/// Gradient of relu given its forward input.
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

struct MaxPoolResult {
  Tensor out;
  /// Flat index into the input of each output's maximum.
  std::vector<std::uint32_t> argmax;
};

/// 2x2 window, stride 2. Odd spatial extents are rejected.
MaxPoolResult maxpool2x2_forward(const Tensor& x);
Tensor maxpool2x2_backward(const Tensor& grad_out, std::span<const std::uint32_t> argmax,
                           const Shape& in_shape);

/// Fully connected layer over the flattened C*H*W features of each sample.
/// w has shape (out, in, 1, 1); the result has shape (N, out, 1, 1).
Tensor linear_forward(const Tensor& x, const Tensor& w, std::span<const float> b);

struct LinearGrads {
  Tensor grad_x;
  Tensor grad_w;
  std::vector<float> grad_b;
};
LinearGrads linear_backward(const Tensor& x, const Tensor& w, const Tensor& grad_out);

inline constexpr float kBatchNormEps = 1e-5f;
inline constexpr float kBatchNormMomentum = 0.1f;

/// Per-channel statistics kept from a training-mode batchnorm pass.
struct BatchNormCache {
  Tensor normalized;
  std::vector<float> inv_std;
};

/// Training mode: normalizes with batch statistics and folds them into the
/// running estimates (biased variance for normalization, unbiased for the
/// running variance).
Tensor batchnorm_forward_train(const Tensor& x, std::span<const float> gamma,
                               std::span<const float> beta, std::span<float> running_mean,
                               std::span<float> running_var, BatchNormCache& cache);
Tensor batchnorm_forward_eval(const Tensor& x, std::span<const float> gamma,
                              std::span<const float> beta, std::span<const float> running_mean,
                              std::span<const float> running_var);

struct BatchNormGrads {
  Tensor grad_x;
  std::vector<float> grad_gamma;
  std::vector<float> grad_beta;
};
BatchNormGrads batchnorm_backward(const BatchNormCache& cache, std::span<const float> gamma,
                                  const Tensor& grad_out);

Tensor global_avg_pool_forward(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& grad_out, const Shape& in_shape);

Tensor add(const Tensor& a, const Tensor& b);

struct LossResult {
  float loss = 0.0f;
  Tensor grad;
};

/// Mean cross-entropy of softmax(logits) over the batch. logits has shape
/// (N, classes, 1, 1); the gradient is (softmax - onehot) / N.
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels);

/// Mean squared error over every element.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

/// Index of the largest logit per sample.
std::vector<std::uint32_t> argmax_classes(const Tensor& logits);

}  // namespace randpad
