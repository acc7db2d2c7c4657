#include "randpad/layers.hpp"

#include <algorithm>
#include <cmath>

#include "randpad/error.hpp"

namespace randpad {

Tensor relu_forward(const Tensor& x) {
  Tensor out(x.shape());
  auto src = x.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0f ? src[i] : 0.0f;
  return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  if (x.shape() != grad_out.shape()) throw InvalidArgument("relu_backward: shape mismatch");
  Tensor out(x.shape());
  auto xs = x.data();
  auto g = grad_out.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) dst[i] = xs[i] > 0.0f ? g[i] : 0.0f;
  return out;
}

MaxPoolResult maxpool2x2_forward(const Tensor& x) {
  const Shape& s = x.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw InvalidArgument("maxpool2x2: odd spatial extent in " + s.str());
  }
  const std::size_t oh = s.h / 2;
  const std::size_t ow = s.w / 2;
  MaxPoolResult r{Tensor({s.n, s.c, oh, ow}), std::vector<std::uint32_t>(s.n * s.c * oh * ow)};
  std::size_t o = 0;
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t base = (n * s.c + c) * s.plane();
      const float* plane = x.data().data() + base;
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t xx = 0; xx < ow; ++xx, ++o) {
          std::size_t best = (2 * y) * s.w + 2 * xx;
          for (std::size_t idx : {best + 1, best + s.w, best + s.w + 1}) {
            if (plane[idx] > plane[best]) best = idx;
          }
          r.out.data()[o] = plane[best];
          r.argmax[o] = static_cast<std::uint32_t>(base + best);
        }
      }
    }
  }
  return r;
}

Tensor maxpool2x2_backward(const Tensor& grad_out, std::span<const std::uint32_t> argmax,
                           const Shape& in_shape) {
  if (argmax.size() != grad_out.numel()) throw InvalidArgument("maxpool2x2_backward: size mismatch");
  Tensor out(in_shape);
  auto g = grad_out.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < g.size(); ++i) dst[argmax[i]] += g[i];
  return out;
}

Tensor linear_forward(const Tensor& x, const Tensor& w, std::span<const float> b) {
  const std::size_t in = x.shape().sample();
  const Shape& ws = w.shape();
  if (ws.c != in || ws.h != 1 || ws.w != 1) {
    throw InvalidArgument("linear: weight " + ws.str() + " does not accept input " +
                          x.shape().str());
  }
  if (b.size() != ws.n) throw InvalidArgument("linear: bias length mismatch");
  const std::size_t batch = x.shape().n;
  // wt[i][o] so the inner loop runs across outputs; each output still sums
  // its inputs in index order.
  std::vector<float> wt(in * ws.n);
  for (std::size_t o = 0; o < ws.n; ++o) {
    for (std::size_t i = 0; i < in; ++i) wt[i * ws.n + o] = w.data()[o * in + i];
  }
  Tensor out({batch, ws.n, 1, 1});
  std::vector<float> acc(ws.n);
  for (std::size_t n = 0; n < batch; ++n) {
    const float* xs = x.sample(n).data();
    std::fill(acc.begin(), acc.end(), 0.0f);
    for (std::size_t i = 0; i < in; ++i) {
      const float xv = xs[i];
      const float* wrow = wt.data() + i * ws.n;
      for (std::size_t o = 0; o < ws.n; ++o) acc[o] += wrow[o] * xv;
    }
    for (std::size_t o = 0; o < ws.n; ++o) out.data()[n * ws.n + o] = acc[o] + b[o];
  }
  return out;
}

LinearGrads linear_backward(const Tensor& x, const Tensor& w, const Tensor& grad_out) {
  const std::size_t in = x.shape().sample();
  const std::size_t outs = w.shape().n;
  const std::size_t batch = x.shape().n;
  if (w.shape().c != in || grad_out.shape() != Shape{batch, outs, 1, 1}) {
    throw InvalidArgument("linear_backward: shape mismatch");
  }
  LinearGrads g{Tensor(x.shape()), Tensor(w.shape()), std::vector<float>(outs, 0.0f)};
  for (std::size_t n = 0; n < batch; ++n) {
    const float* xs = x.sample(n).data();
    float* gx = g.grad_x.sample(n).data();
    for (std::size_t o = 0; o < outs; ++o) {
      const float go = grad_out.data()[n * outs + o];
      g.grad_b[o] += go;
      float* gw = g.grad_w.data().data() + o * in;
      const float* wr = w.data().data() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        gw[i] += go * xs[i];
        gx[i] += go * wr[i];
      }
    }
  }
  return g;
}

Tensor batchnorm_forward_train(const Tensor& x, std::span<const float> gamma,
                               std::span<const float> beta, std::span<float> running_mean,
                               std::span<float> running_var, BatchNormCache& cache) {
  const Shape& s = x.shape();
  if (gamma.size() != s.c || beta.size() != s.c || running_mean.size() != s.c ||
      running_var.size() != s.c) {
    throw InvalidArgument("batchnorm: parameter length mismatch for input " + s.str());
  }
  const std::size_t count = s.n * s.plane();
  if (count < 2) throw InvalidArgument("batchnorm: training needs more than one value per channel");
  cache.normalized = Tensor(s);
  cache.inv_std.assign(s.c, 0.0f);
  Tensor out(s);
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      for (float v : x.plane(n, c)) sum += v;
    }
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      for (float v : x.plane(n, c)) sq += (v - mean) * (v - mean);
    }
    const double var = sq / static_cast<double>(count);
    const float inv_std = static_cast<float>(1.0 / std::sqrt(var + kBatchNormEps));
    cache.inv_std[c] = inv_std;
    const float m = static_cast<float>(mean);
    for (std::size_t n = 0; n < s.n; ++n) {
      auto src = x.plane(n, c);
      auto xh = cache.normalized.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) {
        xh[i] = (src[i] - m) * inv_std;
        dst[i] = gamma[c] * xh[i] + beta[c];
      }
    }
    const double unbiased = sq / static_cast<double>(count - 1);
    running_mean[c] = (1.0f - kBatchNormMomentum) * running_mean[c] + kBatchNormMomentum * m;
    running_var[c] = (1.0f - kBatchNormMomentum) * running_var[c] +
                     kBatchNormMomentum * static_cast<float>(unbiased);
  }
  return out;
}

Tensor batchnorm_forward_eval(const Tensor& x, std::span<const float> gamma,
                              std::span<const float> beta, std::span<const float> running_mean,
                              std::span<const float> running_var) {
  const Shape& s = x.shape();
  if (gamma.size() != s.c || beta.size() != s.c || running_mean.size() != s.c ||
      running_var.size() != s.c) {
    throw InvalidArgument("batchnorm: parameter length mismatch for input " + s.str());
  }
  Tensor out(s);
  for (std::size_t c = 0; c < s.c; ++c) {
    const float inv_std = 1.0f / std::sqrt(running_var[c] + kBatchNormEps);
    const float scale = gamma[c] * inv_std;
    const float shift = beta[c] - running_mean[c] * scale;
    for (std::size_t n = 0; n < s.n; ++n) {
      auto src = x.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] * scale + shift;
    }
  }
  return out;
}

BatchNormGrads batchnorm_backward(const BatchNormCache& cache, std::span<const float> gamma,
                                  const Tensor& grad_out) {
  const Shape& s = grad_out.shape();
  if (cache.normalized.shape() != s) throw InvalidArgument("batchnorm_backward: shape mismatch");
  const auto count = static_cast<float>(s.n * s.plane());
  BatchNormGrads g{Tensor(s), std::vector<float>(s.c, 0.0f), std::vector<float>(s.c, 0.0f)};
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      auto go = grad_out.plane(n, c);
      auto xh = cache.normalized.plane(n, c);
      for (std::size_t i = 0; i < go.size(); ++i) {
        sum_g += go[i];
        sum_gx += go[i] * xh[i];
      }
    }
    g.grad_beta[c] = static_cast<float>(sum_g);
    g.grad_gamma[c] = static_cast<float>(sum_gx);
    const float k = gamma[c] * cache.inv_std[c] / count;
    const auto mg = static_cast<float>(sum_g);
    const auto mgx = static_cast<float>(sum_gx);
    for (std::size_t n = 0; n < s.n; ++n) {
      auto go = grad_out.plane(n, c);
      auto xh = cache.normalized.plane(n, c);
      auto dst = g.grad_x.plane(n, c);
      for (std::size_t i = 0; i < go.size(); ++i) {
        dst[i] = k * (count * go[i] - mg - xh[i] * mgx);
      }
    }
  }
  return g;
}

Tensor global_avg_pool_forward(const Tensor& x) {
  const Shape& s = x.shape();
  Tensor out({s.n, s.c, 1, 1});
  const auto inv = 1.0f / static_cast<float>(s.plane());
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      float acc = 0.0f;
      for (float v : x.plane(n, c)) acc += v;
      out.at(n, c, 0, 0) = acc * inv;
    }
  }
  return out;
}

Tensor global_avg_pool_backward(const Tensor& grad_out, const Shape& in_shape) {
  Tensor out(in_shape);
  const auto inv = 1.0f / static_cast<float>(in_shape.plane());
  for (std::size_t n = 0; n < in_shape.n; ++n) {
    for (std::size_t c = 0; c < in_shape.c; ++c) {
      const float g = grad_out.at(n, c, 0, 0) * inv;
      for (float& v : out.plane(n, c)) v = g;
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument("add: " + a.shape().str() + " vs " + b.shape().str());
  }
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  return out;
}

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels) {
  const std::size_t batch = logits.shape().n;
  const std::size_t classes = logits.shape().sample();
  if (labels.size() != batch) throw InvalidArgument("softmax_cross_entropy: label count mismatch");
  LossResult r{0.0f, Tensor(logits.shape())};
  double total = 0.0;
  const auto inv_n = 1.0f / static_cast<float>(batch);
  std::vector<double> p(classes);
  for (std::size_t n = 0; n < batch; ++n) {
    if (labels[n] >= classes) {
      throw InvalidArgument("softmax_cross_entropy: label " + std::to_string(labels[n]) +
                            " out of range for " + std::to_string(classes) + " classes");
    }
    auto z = logits.sample(n);
    const float zmax = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      p[k] = std::exp(static_cast<double>(z[k] - zmax));
      denom += p[k];
    }
    total += std::log(denom) - static_cast<double>(z[labels[n]] - zmax);
    auto g = r.grad.sample(n);
    for (std::size_t k = 0; k < classes; ++k) {
      const double onehot = k == labels[n] ? 1.0 : 0.0;
      g[k] = static_cast<float>(p[k] / denom - onehot) * inv_n;
    }
  }
  r.loss = static_cast<float>(total / static_cast<double>(batch));
  return r;
}

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw InvalidArgument("mse_loss: " + pred.shape().str() + " vs " + target.shape().str());
  }
  LossResult r{0.0f, Tensor(pred.shape())};
  const auto count = static_cast<float>(pred.numel());
  double total = 0.0;
  for (std::size_t i = 0; i < pred.numel(); ++i) {
    const float d = pred.data()[i] - target.data()[i];
    total += static_cast<double>(d) * d;
    r.grad.data()[i] = 2.0f * d / count;
  }
  r.loss = static_cast<float>(total / static_cast<double>(count));
  return r;
}

std::vector<std::uint32_t> argmax_classes(const Tensor& logits) {
  std::vector<std::uint32_t> out(logits.shape().n);
  for (std::size_t n = 0; n < out.size(); ++n) {
    auto z = logits.sample(n);
    out[n] = static_cast<std::uint32_t>(std::max_element(z.begin(), z.end()) - z.begin());
  }
  return out;
}

}  // namespace randpad
