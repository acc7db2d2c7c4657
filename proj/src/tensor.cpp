#include "randpad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "randpad/error.hpp"

namespace randpad {

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << "," << c << "," << h << "," << w << ")";
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw InvalidArgument("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape " + shape_.str());
  }
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.numel() != numel()) {
    throw InvalidArgument("cannot reshape " + shape_.str() + " to " + shape.str());
  }
  return Tensor(shape, data_);
}

Tensor Tensor::sample_tensor(std::size_t n) const {
  if (n >= shape_.n) throw InvalidArgument("sample index out of range");
  auto s = sample(n);
  return Tensor({1, shape_.c, shape_.h, shape_.w}, std::vector<float>(s.begin(), s.end()));
}

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  float frac;
};

// Source taps for each output coordinate along one axis.
std::vector<Tap> resize_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double last = static_cast<double>(in - 1);
  for (std::size_t i = 0; i < out; ++i) {
    double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[i] = {lo, hi, static_cast<float>(src - static_cast<double>(lo))};
  }
  return taps;
}

}  // namespace

Tensor bilinear_resize(const Tensor& t, std::size_t out_h, std::size_t out_w) {
  const Shape& s = t.shape();
  if (s.h == 0 || s.w == 0 || out_h == 0 || out_w == 0) {
    throw InvalidArgument("bilinear_resize: zero extent (input " + s.str() + ", output " +
                          std::to_string(out_h) + "x" + std::to_string(out_w) + ")");
  }
  if (out_h == s.h && out_w == s.w) return t;

  const auto ty = resize_taps(s.h, out_h);
  const auto tx = resize_taps(s.w, out_w);
  Tensor out({s.n, s.c, out_h, out_w});
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      auto src = t.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t y = 0; y < out_h; ++y) {
        const Tap& a = ty[y];
        const float* r0 = src.data() + a.lo * s.w;
        const float* r1 = src.data() + a.hi * s.w;
        for (std::size_t x = 0; x < out_w; ++x) {
          const Tap& b = tx[x];
          const float top = r0[b.lo] + (r0[b.hi] - r0[b.lo]) * b.frac;
          const float bot = r1[b.lo] + (r1[b.hi] - r1[b.lo]) * b.frac;
          dst[y * out_w + x] = top + (bot - top) * a.frac;
        }
      }
    }
  }
  return out;
}

Tensor concat_channels(std::span<const Tensor> ts) {
  if (ts.empty()) throw InvalidArgument("concat_channels: no inputs");
  const Shape& first = ts.front().shape();
  std::size_t channels = 0;
  for (const Tensor& t : ts) {
    const Shape& s = t.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw InvalidArgument("concat_channels: " + s.str() + " incompatible with " + first.str());
    }
    channels += s.c;
  }
  Tensor out({first.n, channels, first.h, first.w});
  for (std::size_t n = 0; n < first.n; ++n) {
    float* dst = out.sample(n).data();
    for (const Tensor& t : ts) {
      auto src = t.sample(n);
      dst = std::copy(src.begin(), src.end(), dst);
    }
  }
  return out;
}

Tensor slice_spatial(const Tensor& t, std::size_t top, std::size_t left, std::size_t h,
                     std::size_t w) {
  const Shape& s = t.shape();
  if (top + h > s.h || left + w > s.w) {
    throw InvalidArgument("slice_spatial: window " + std::to_string(h) + "x" + std::to_string(w) +
                          " at (" + std::to_string(top) + "," + std::to_string(left) +
                          ") exceeds " + s.str());
  }
  Tensor out({s.n, s.c, h, w});
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      auto src = t.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t y = 0; y < h; ++y) {
        const float* row = src.data() + (top + y) * s.w + left;
        std::copy(row, row + w, dst.data() + y * w);
      }
    }
  }
  return out;
}

Tensor stack_samples(std::span<const Tensor> samples) {
  if (samples.empty()) throw InvalidArgument("stack_samples: no inputs");
  const Shape& first = samples.front().shape();
  std::size_t total = 0;
  for (const Tensor& s : samples) {
    if (s.shape().c != first.c || s.shape().h != first.h || s.shape().w != first.w) {
      throw InvalidArgument("stack_samples: " + s.shape().str() + " incompatible with " +
                            first.str());
    }
    total += s.shape().n;
  }
  std::vector<float> data;
  data.reserve(total * first.sample());
  for (const Tensor& s : samples) data.insert(data.end(), s.data().begin(), s.data().end());
  return Tensor({total, first.c, first.h, first.w}, std::move(data));
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.data().begin(), t.data().end(), [](float v) { return std::isfinite(v); });
}

}  // namespace randpad
