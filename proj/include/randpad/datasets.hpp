#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "randpad/rng.hpp"
#include "randpad/tensor.hpp"

namespace randpad {

struct ChannelStats {
  std::vector<float> mean;
  std::vector<float> stddev;

  friend bool operator==(const ChannelStats&, const ChannelStats&) = default;
};

struct LabeledDataset {
  /// (N, C, H, W); values in [0, 1] until normalized.
  Tensor images;
  std::vector<std::uint32_t> labels;
  std::size_t class_count = 0;
  /// Statistics applied by normalize(); empty for raw data.
  ChannelStats normalization;

  std::size_t size() const { return labels.size(); }
};

/// Big-endian IDX pair: images (magic 0x803, count, rows, cols, u8 pixels)
/// and labels (magic 0x801, count, u8 labels). Pixels are scaled to [0, 1].
LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path);
LabeledDataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);

enum class Split { train, test };

/// Fashion-MNIST / MNIST directory with the canonical
/// {train,t10k}-{images-idx3,labels-idx1}-ubyte file names.
LabeledDataset load_fashion_mnist(const std::filesystem::path& dir, Split split);

enum class CifarVariant { c10, c100 };

/// One CIFAR binary batch. c10 records are <label><3072 planar RGB bytes>;
/// c100 records are <coarse><fine><3072 bytes> and keep the fine label.
LabeledDataset parse_cifar(std::span<const std::uint8_t> bytes, CifarVariant variant);
LabeledDataset load_cifar_file(const std::filesystem::path& path, CifarVariant variant);

/// All batches of a split: data_batch_1..5.bin / test_batch.bin for c10,
/// train.bin / test.bin for c100.
LabeledDataset load_cifar(const std::filesystem::path& dir, CifarVariant variant, Split split);

/// First `count` samples (all when count is 0 or exceeds the size).
LabeledDataset take_first(const LabeledDataset& ds, std::size_t count);
LabeledDataset take_range(const LabeledDataset& ds, std::size_t begin, std::size_t count);

/// Zero-pads images symmetrically up to the next multiple of `multiple`.
LabeledDataset pad_to_multiple(const LabeledDataset& ds, std::size_t multiple);

/// Per-channel mean and standard deviation; throws FormatError if a channel
/// is constant.
ChannelStats compute_channel_stats(const Tensor& images);

/// (x - mean) / std with statistics computed from ds itself (training split).
LabeledDataset normalize(LabeledDataset ds);
/// Applies statistics computed elsewhere (test split uses the training stats).
LabeledDataset normalize(LabeledDataset ds, const ChannelStats& stats);
Tensor normalize_images(const Tensor& images, const ChannelStats& stats);

enum class SyntheticKind { black, white, noise };
SyntheticKind parse_synthetic_kind(std::string_view name);

/// black: zeros; white: ones; noise: standard Gaussian clipped to [-3, 3]
/// and mapped affinely onto [0, 1].
Tensor make_synthetic(SyntheticKind kind, const Shape& shape, RngStream* rng = nullptr);

enum class PatternKind { HG, VG, G, HS, VS };
PatternKind parse_pattern_kind(std::string_view name);
std::string to_string(PatternKind kind);
inline constexpr PatternKind kAllPatterns[] = {PatternKind::HG, PatternKind::VG, PatternKind::G,
                                               PatternKind::HS, PatternKind::VS};

struct GroundTruthPattern {
  PatternKind kind = PatternKind::HG;
  /// Gaussian width in pixels; 0 selects w / 4.
  double sigma = 0.0;
  /// Stripe period in pixels, half on and half off.
  std::size_t period = 8;
};

/// Position map of shape (1, 1, h, w) with values in [0, 1].
Tensor make_gt_pattern(const GroundTruthPattern& p, std::size_t h, std::size_t w);

}  // namespace randpad
