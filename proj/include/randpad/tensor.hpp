#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace randpad {

/// Extents of a rank-4 N-C-H-W array.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t numel() const { return n * c * h * w; }
  std::size_t plane() const { return h * w; }
  std::size_t sample() const { return c * h * w; }
  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense row-major N-C-H-W float array.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& values() const { return data_; }

  float& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }
  float at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }

  /// One H*W channel plane of one sample.
  std::span<float> plane(std::size_t n, std::size_t c) {
    return std::span<float>(data_).subspan((n * shape_.c + c) * shape_.plane(), shape_.plane());
  }
  std::span<const float> plane(std::size_t n, std::size_t c) const {
    return std::span<const float>(data_).subspan((n * shape_.c + c) * shape_.plane(), shape_.plane());
  }

  /// All C*H*W values of sample n.
  std::span<float> sample(std::size_t n) {
    return std::span<float>(data_).subspan(n * shape_.sample(), shape_.sample());
  }
  std::span<const float> sample(std::size_t n) const {
    return std::span<const float>(data_).subspan(n * shape_.sample(), shape_.sample());
  }

  /// Same data under a different shape with equal element count.
  Tensor reshaped(Shape shape) const;

  /// Copies sample n into a (1, C, H, W) tensor.
  Tensor sample_tensor(std::size_t n) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

/// Bilinear resampling with half-pixel centers and edge clamping.
Tensor bilinear_resize(const Tensor& t, std::size_t out_h, std::size_t out_w);

/// Stacks inputs along the channel axis in the given order.
Tensor concat_channels(std::span<const Tensor> ts);

/// The (h, w) window starting at (top, left) of every plane.
Tensor slice_spatial(const Tensor& t, std::size_t top, std::size_t left, std::size_t h,
                     std::size_t w);

/// Stacks (1, C, H, W) tensors into a batch.
Tensor stack_samples(std::span<const Tensor> samples);

bool all_finite(const Tensor& t);

}  // namespace randpad
