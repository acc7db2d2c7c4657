#include "randpad/optim.hpp"

#include "randpad/error.hpp"

namespace randpad {

void sgd_step(std::span<Parameter* const> params, OptimizerState& opt) {
  if (opt.velocity.empty()) {
    opt.velocity.reserve(params.size());
    for (const Parameter* p : params) opt.velocity.emplace_back(p->value.shape());
  }
  if (opt.velocity.size() != params.size()) {
    throw InvalidArgument("sgd_step: optimizer state was built for a different parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    auto v = opt.velocity[i].data();
    auto w = p.value.data();
    auto g = p.grad.data();
    if (v.size() != w.size()) throw InvalidArgument("sgd_step: velocity shape mismatch");
    for (std::size_t j = 0; j < w.size(); ++j) {
      v[j] = opt.momentum * v[j] + g[j] + opt.weight_decay * w[j];
      w[j] -= opt.lr * v[j];
      g[j] = 0.0f;
    }
  }
}

}  // namespace randpad
