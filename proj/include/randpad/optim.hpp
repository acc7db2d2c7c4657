#pragma once

#include <span>
#include <vector>

#include "randpad/model.hpp"

namespace randpad {

struct OptimizerState {
  float lr = 1e-3f;
  float momentum = 0.9f;
  float weight_decay = 1e-4f;
  /// One velocity per parameter, created on the first step.
  std::vector<Tensor> velocity;
};

/// v <- momentum * v + grad + weight_decay * value; value <- value - lr * v.
/// Gradients are zeroed afterwards.
void sgd_step(std::span<Parameter* const> params, OptimizerState& opt);

}  // namespace randpad
