#include "randpad/padding.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "randpad/error.hpp"

namespace randpad {

std::string PaddingSpec::str() const {
  std::ostringstream os;
  os << left << "," << right << "," << top << "," << bottom;
  return os.str();
}

PaddingSpec PaddingSpec::parse(const std::string& text) {
  std::array<std::size_t, 4> v{};
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t end = i < 3 ? text.find(',', pos) : text.size();
    if (end == std::string::npos) throw InvalidArgument("malformed padding spec '" + text + "'");
    const char* first = text.data() + pos;
    const char* last = text.data() + end;
    auto [ptr, ec] = std::from_chars(first, last, v[i]);
    if (ec != std::errc() || ptr != last) {
      throw InvalidArgument("malformed padding spec '" + text + "'");
    }
    pos = end + 1;
  }
  return {v[0], v[1], v[2], v[3]};
}

PaddingSpec accumulate_padding_options(std::span<const std::size_t> rows) {
  PaddingSpec spec;
  for (std::size_t r : rows) {
    if (r >= kPaddingOptions.size()) throw InvalidArgument("padding option row out of range");
    const auto& opt = kPaddingOptions[r];
    spec.left += opt[0];
    spec.right += opt[1];
    spec.top += opt[2];
    spec.bottom += opt[3];
  }
  return spec;
}

std::size_t draw_padding_option(RngStream& rng) {
  return static_cast<std::size_t>(rng.uniform_index(kPaddingOptions.size()));
}

PaddingSpec sample_padding_spec(std::size_t n, RngStream& rng) {
  if (n == 0) throw InvalidArgument("random padding thickness must be >= 1");
  std::vector<std::size_t> rows(2 * n);
  for (auto& r : rows) r = draw_padding_option(rng);
  return accumulate_padding_options(rows);
}

Tensor apply_pad(const Tensor& x, const PaddingSpec& spec) {
  const Shape& s = x.shape();
  if (s.n == 0) return Tensor({0, s.c, s.h + spec.top + spec.bottom, s.w + spec.left + spec.right});
  std::vector<PaddingSpec> specs(s.n, spec);
  return apply_pad(x, specs);
}

Tensor apply_pad(const Tensor& x, std::span<const PaddingSpec> specs) {
  const Shape& s = x.shape();
  if (specs.size() != s.n) {
    throw InvalidArgument("apply_pad: " + std::to_string(specs.size()) + " specs for batch of " +
                          std::to_string(s.n));
  }
  if (s.n == 0) return x;
  const std::size_t out_h = s.h + specs[0].top + specs[0].bottom;
  const std::size_t out_w = s.w + specs[0].left + specs[0].right;
  for (const PaddingSpec& sp : specs) {
    if (s.h + sp.top + sp.bottom != out_h || s.w + sp.left + sp.right != out_w) {
      throw InvalidArgument("apply_pad: per-sample specs disagree on padded extent");
    }
  }
  Tensor out({s.n, s.c, out_h, out_w});
  for (std::size_t n = 0; n < s.n; ++n) {
    const PaddingSpec& sp = specs[n];
    for (std::size_t c = 0; c < s.c; ++c) {
      auto src = x.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t y = 0; y < s.h; ++y) {
        const float* row = src.data() + y * s.w;
        std::copy(row, row + s.w, dst.data() + (y + sp.top) * out_w + sp.left);
      }
    }
  }
  return out;
}

Tensor traditional_pad(const Tensor& x, std::size_t n) {
  if (n == 0) return x;
  return apply_pad(x, PaddingSpec::symmetric(n));
}

Tensor pad_backward(const Tensor& grad_out, const PaddingSpec& spec, std::size_t in_h,
                    std::size_t in_w) {
  std::vector<PaddingSpec> specs(grad_out.shape().n, spec);
  return pad_backward(grad_out, specs, in_h, in_w);
}

Tensor pad_backward(const Tensor& grad_out, std::span<const PaddingSpec> specs, std::size_t in_h,
                    std::size_t in_w) {
  const Shape& s = grad_out.shape();
  if (specs.size() != s.n) throw InvalidArgument("pad_backward: spec count != batch size");
  for (const PaddingSpec& sp : specs) {
    if (in_h + sp.top + sp.bottom != s.h || in_w + sp.left + sp.right != s.w) {
      throw InvalidArgument("pad_backward: gradient " + s.str() + " inconsistent with spec " +
                            sp.str() + " and input " + std::to_string(in_h) + "x" +
                            std::to_string(in_w));
    }
  }
  Tensor out({s.n, s.c, in_h, in_w});
  for (std::size_t n = 0; n < s.n; ++n) {
    const PaddingSpec& sp = specs[n];
    for (std::size_t c = 0; c < s.c; ++c) {
      auto src = grad_out.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t y = 0; y < in_h; ++y) {
        const float* row = src.data() + (y + sp.top) * s.w + sp.left;
        std::copy(row, row + in_w, dst.data() + y * in_w);
      }
    }
  }
  return out;
}

std::pair<Tensor, std::vector<PaddingSpec>> pad_for_mode(const Tensor& x, std::size_t n, Mode mode,
                                                         std::span<RngStream> rngs) {
  if (n == 0) throw InvalidArgument("pad_for_mode: thickness must be >= 1");
  const std::size_t batch = x.shape().n;
  std::vector<PaddingSpec> specs;
  specs.reserve(batch);
  if (mode == Mode::eval) {
    specs.assign(batch, PaddingSpec::symmetric(n));
  } else {
    if (rngs.size() != batch) {
      throw InvalidArgument("pad_for_mode: need one rng stream per sample");
    }
    for (std::size_t i = 0; i < batch; ++i) specs.push_back(sample_padding_spec(n, rngs[i]));
  }
  Tensor out = apply_pad(x, specs);
  return {std::move(out), std::move(specs)};
}

}  // namespace randpad
