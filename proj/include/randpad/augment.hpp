#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "randpad/rng.hpp"
#include "randpad/tensor.hpp"

namespace randpad {

// All augmentations take and return a single image of shape (1, C, H, W).

/// Window of the original size at (top, left) of the image zero-padded by `pad`.
Tensor crop_window(const Tensor& img, std::size_t pad, std::size_t top, std::size_t left);
Tensor random_crop(const Tensor& img, std::size_t pad, RngStream& rng);

/// Column j moves to W - 1 - j.
Tensor flip_horizontal(const Tensor& img);
Tensor random_flip(const Tensor& img, double p, RngStream& rng);

/// Counter-clockwise rotation about the image centre, nearest-neighbour
/// sampling, zero outside the source.
Tensor rotate(const Tensor& img, double degrees);
Tensor random_rotation(const Tensor& img, double max_degrees, RngStream& rng);

struct EraseParams {
  double p = 0.5;
  double area_lo = 0.02;
  double area_hi = 0.4;
  double aspect_lo = 0.3;
  double aspect_hi = 3.33;
  std::size_t attempts = 100;
  /// Per-channel range of the fill noise; empty means [0, 1] for every channel.
  std::vector<float> fill_lo;
  std::vector<float> fill_hi;
};

struct EraseRect {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t h = 0;
  std::size_t w = 0;
};

/// Rejection-samples a rectangle with area ratio and aspect ratio inside the
/// configured ranges; nullopt once the attempts are exhausted.
std::optional<EraseRect> sample_erase_rect(std::size_t h, std::size_t w, const EraseParams& params,
                                           RngStream& rng);
Tensor erase_rect(const Tensor& img, const EraseRect& rect, const EraseParams& params,
                  RngStream& rng);
/// With probability p erases one sampled rectangle. `erased` receives the
/// rectangle when one was applied.
Tensor random_erasing(const Tensor& img, const EraseParams& params, RngStream& rng,
                      std::optional<EraseRect>* erased = nullptr);

enum class Augmentation { RC, RR, RF, RE };

struct AugmentParams {
  std::size_t crop_pad = 4;
  double flip_p = 0.5;
  double max_degrees = 30.0;
  EraseParams erase;
};

/// Enabled augmentations, always applied in RC, RR, RF, RE order.
class AugmentPipeline {
 public:
  AugmentPipeline() = default;
  AugmentPipeline(std::vector<Augmentation> steps, AugmentParams params);

  /// Comma-separated lowercase tags, e.g. "rc,rf,re". Empty or "none" is the
  /// identity pipeline. Unknown tags throw ConfigError.
  static AugmentPipeline parse(std::string_view tags, AugmentParams params = {});

  bool empty() const { return steps_.empty(); }
  const std::vector<Augmentation>& steps() const { return steps_; }
  const AugmentParams& params() const { return params_; }
  /// Canonical tag list, e.g. "rc,rf,re"; "none" when empty.
  std::string str() const;

  /// Augments one image with the stream for (seed, epoch, sample_index).
  Tensor apply(const Tensor& img, std::uint64_t seed, std::uint64_t epoch,
               std::uint64_t sample_index) const;

  /// Augments every sample of a batch; sample i uses sample_ids[i].
  Tensor apply_batch(const Tensor& batch, std::uint64_t seed, std::uint64_t epoch,
                     std::span<const std::uint64_t> sample_ids) const;

 private:
  std::vector<Augmentation> steps_;
  AugmentParams params_;
};

}  // namespace randpad
