#pragma once

// Test-only oracles: independent naive implementations and finite-difference
// gradient checks. Nothing here calls into the kernels it is used to verify
// except through their public forward/backward entry points.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "randpad/conv.hpp"
#include "randpad/layers.hpp"
#include "randpad/padding.hpp"
#include "randpad/rng.hpp"
#include "randpad/tensor.hpp"

namespace rp_test {

using randpad::Shape;
using randpad::Tensor;
using Gen = std::mt19937_64;

inline std::size_t pick(Gen& g, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(g);
}

inline Tensor random_tensor(const Shape& s, Gen& g, float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> d(lo, hi);
  Tensor t(s);
  for (float& v : t.data()) v = d(g);
  return t;
}

// Values are a shuffled arithmetic sequence, so any two differ by at least
// `spacing`. Keeps max and relu kinks out of reach of a finite-difference step.
inline Tensor distinct_tensor(const Shape& s, Gen& g, float spacing = 0.1f) {
  std::vector<float> v(s.numel());
  const float offset = -spacing * static_cast<float>(v.size()) / 2.0f + spacing / 2.0f;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = offset + spacing * static_cast<float>(i);
  std::shuffle(v.begin(), v.end(), g);
  return Tensor(s, std::move(v));
}

// Naive direct convolution in double, no im2col, no reordering.
inline Tensor naive_conv(const Tensor& x, const Tensor& w, std::span<const float> b,
                         std::size_t stride) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  const std::size_t oh = (xs.h - ws.h) / stride + 1;
  const std::size_t ow = (xs.w - ws.w) / stride + 1;
  Tensor out({xs.n, ws.n, oh, ow});
  for (std::size_t n = 0; n < xs.n; ++n)
    for (std::size_t o = 0; o < ws.n; ++o)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = b.empty() ? 0.0 : b[o];
          for (std::size_t c = 0; c < xs.c; ++c)
            for (std::size_t u = 0; u < ws.h; ++u)
              for (std::size_t v = 0; v < ws.w; ++v)
                acc += static_cast<double>(x.at(n, c, i * stride + u, j * stride + v)) *
                       w.at(o, c, u, v);
          out.at(n, o, i, j) = static_cast<float>(acc);
        }
  return out;
}

inline double weighted_sum(const Tensor& out, const Tensor& r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < out.numel(); ++i) {
    acc += static_cast<double>(out.data()[i]) * r.data()[i];
  }
  return acc;
}

// Central differences of f with respect to every element of x (mutated in
// place and restored).
inline std::vector<double> central_diff(std::span<float> x, const std::function<double()>& f,
                                        float h = 1e-2f) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float keep = x[i];
    x[i] = keep + h;
    const double up = f();
    x[i] = keep - h;
    const double down = f();
    x[i] = keep;
    g[i] = (up - down) / (2.0 * static_cast<double>(h));
  }
  return g;
}

// ||num - an|| / max(||num||, ||an||); 0 when both vanish.
inline double relative_error(std::span<const double> num, std::span<const float> an) {
  double diff = 0.0;
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) {
    diff += (num[i] - an[i]) * (num[i] - an[i]);
    a += num[i] * num[i];
    b += static_cast<double>(an[i]) * an[i];
  }
  const double denom = std::sqrt(std::max(a, b));
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

// Each check draws its own random small shape and returns the worst relative
// error over all differentiated inputs.

inline double gradcheck_conv(Gen& g) {
  const std::size_t k = pick(g, 0, 1) ? 3 : 1;
  const std::size_t stride = pick(g, 1, 2);
  const Shape xs{pick(g, 1, 2), pick(g, 1, 3), pick(g, k, 6), pick(g, k, 6)};
  const Shape ws{pick(g, 1, 3), xs.c, k, k};
  Tensor x = random_tensor(xs, g);
  Tensor w = random_tensor(ws, g);
  Tensor bt = random_tensor({1, 1, 1, ws.n}, g);
  std::vector<float> b(bt.data().begin(), bt.data().end());
  const Tensor probe = randpad::conv2d(x, w, b, stride);
  const Tensor r = random_tensor(probe.shape(), g);
  auto f = [&] { return weighted_sum(randpad::conv2d(x, w, b, stride), r); };
  const auto an = randpad::conv2d_backward(x, w, r, stride);
  double worst = relative_error(central_diff(x.data(), f), an.grad_x.data());
  worst = std::max(worst, relative_error(central_diff(w.data(), f), an.grad_w.data()));
  worst = std::max(worst, relative_error(central_diff(b, f), an.grad_b));
  return worst;
}

inline double gradcheck_linear(Gen& g) {
  const Shape xs{pick(g, 1, 4), pick(g, 1, 3), pick(g, 1, 3), pick(g, 1, 3)};
  const std::size_t out = pick(g, 1, 5);
  Tensor x = random_tensor(xs, g);
  Tensor w = random_tensor({out, xs.sample(), 1, 1}, g);
  Tensor bt = random_tensor({1, 1, 1, out}, g);
  std::vector<float> b(bt.data().begin(), bt.data().end());
  const Tensor r = random_tensor({xs.n, out, 1, 1}, g);
  auto f = [&] { return weighted_sum(randpad::linear_forward(x, w, b), r); };
  const auto an = randpad::linear_backward(x, w, r);
  double worst = relative_error(central_diff(x.data(), f), an.grad_x.data());
  worst = std::max(worst, relative_error(central_diff(w.data(), f), an.grad_w.data()));
  worst = std::max(worst, relative_error(central_diff(b, f), an.grad_b));
  return worst;
}

inline double gradcheck_maxpool(Gen& g) {
  const Shape xs{pick(g, 1, 2), pick(g, 1, 3), 2 * pick(g, 1, 3), 2 * pick(g, 1, 3)};
  Tensor x = distinct_tensor(xs, g);
  const auto fwd = randpad::maxpool2x2_forward(x);
  const Tensor r = random_tensor(fwd.out.shape(), g);
  auto f = [&] { return weighted_sum(randpad::maxpool2x2_forward(x).out, r); };
  const Tensor an = randpad::maxpool2x2_backward(r, fwd.argmax, xs);
  return relative_error(central_diff(x.data(), f), an.data());
}

// At least 4 values per channel: with 2, the normalized output is +-1 up to
// O(eps) and its true gradient sits below float finite-difference noise.
inline double gradcheck_batchnorm(Gen& g) {
  Shape xs{pick(g, 2, 4), pick(g, 1, 3), pick(g, 1, 3), pick(g, 1, 3)};
  if (xs.n * xs.h * xs.w < 4) xs.h = 2;
  Tensor x = random_tensor(xs, g, -2.0f, 2.0f);
  Tensor gt = random_tensor({1, 1, 1, xs.c}, g, 0.5f, 1.5f);
  Tensor bt = random_tensor({1, 1, 1, xs.c}, g);
  std::vector<float> gamma(gt.data().begin(), gt.data().end());
  std::vector<float> beta(bt.data().begin(), bt.data().end());
  auto run = [&](randpad::BatchNormCache& cache) {
    std::vector<float> rm(xs.c, 0.0f);
    std::vector<float> rv(xs.c, 1.0f);
    return randpad::batchnorm_forward_train(x, gamma, beta, rm, rv, cache);
  };
  randpad::BatchNormCache cache;
  const Tensor probe = run(cache);
  const Tensor r = random_tensor(probe.shape(), g);
  auto f = [&] {
    randpad::BatchNormCache scratch;
    return weighted_sum(run(scratch), r);
  };
  const auto an = randpad::batchnorm_backward(cache, gamma, r);
  double worst = relative_error(central_diff(x.data(), f), an.grad_x.data());
  worst = std::max(worst, relative_error(central_diff(gamma, f), an.grad_gamma));
  worst = std::max(worst, relative_error(central_diff(beta, f), an.grad_beta));
  return worst;
}

inline double gradcheck_softmax_xent(Gen& g) {
  const std::size_t n = pick(g, 1, 5);
  const std::size_t classes = pick(g, 2, 10);
  Tensor logits = random_tensor({n, classes, 1, 1}, g, -3.0f, 3.0f);
  std::vector<std::uint32_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint32_t>(pick(g, 0, classes - 1));
  auto f = [&] { return static_cast<double>(randpad::softmax_cross_entropy(logits, labels).loss); };
  const auto an = randpad::softmax_cross_entropy(logits, labels);
  return relative_error(central_diff(logits.data(), f), an.grad.data());
}

inline double gradcheck_pad(Gen& g) {
  const Shape xs{pick(g, 1, 2), pick(g, 1, 2), pick(g, 1, 5), pick(g, 1, 5)};
  const std::size_t thickness = pick(g, 1, 3);
  Tensor x = random_tensor(xs, g);
  randpad::RngStream rng(g(), "gradcheck-pad");
  const randpad::PaddingSpec spec = randpad::sample_padding_spec(thickness, rng);
  const Tensor probe = randpad::apply_pad(x, spec);
  const Tensor r = random_tensor(probe.shape(), g);
  auto f = [&] { return weighted_sum(randpad::apply_pad(x, spec), r); };
  const Tensor an = randpad::pad_backward(r, spec, xs.h, xs.w);
  return relative_error(central_diff(x.data(), f), an.data());
}

// Ranks by brute force: rank of v[i] is 1 + #{j: v[j] < v[i]} + (#{j: v[j] == v[i]} - 1) / 2.
inline std::vector<double> brute_force_ranks(std::span<const float> v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0;
    double equal = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) less += 1.0;
      if (v[j] == v[i]) equal += 1.0;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return (va == 0.0 || vb == 0.0) ? 0.0 : cov / std::sqrt(va * vb);
}

// Tie-free closed form 1 - 6 sum d^2 / (n (n^2 - 1)).
inline double spearman_rank_formula(std::span<const float> a, std::span<const float> b) {
  const auto ra = brute_force_ranks(a);
  const auto rb = brute_force_ranks(b);
  double d2 = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  const double n = static_cast<double>(ra.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

// P(l = k) for thickness n by enumerating all 4^(2n) draw sequences.
inline std::vector<double> enumerate_left_distribution(std::size_t n) {
  const std::size_t draws = 2 * n;
  std::size_t total = 1;
  for (std::size_t i = 0; i < draws; ++i) total *= 4;
  std::vector<double> p(draws + 1, 0.0);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    std::size_t left = 0;
    for (std::size_t i = 0; i < draws; ++i) {
      const std::size_t row = rest % 4;
      rest /= 4;
      // Rows 0 and 1 of the option table add to the left border.
      if (row < 2) ++left;
    }
    p[left] += 1.0 / static_cast<double>(total);
  }
  return p;
}

}  // namespace rp_test
