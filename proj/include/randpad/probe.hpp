#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "randpad/datasets.hpp"
#include "randpad/model.hpp"
#include "randpad/tensor.hpp"

namespace randpad {

/// Spearman rank correlation of two equally sized maps. Ties get their
/// average rank; if either map is constant the result is 0.
double spearman(std::span<const float> pred, std::span<const float> gt);
double spearman(const Tensor& pred, const Tensor& gt);

/// Fractional 1-based ranks with ties averaged.
std::vector<double> average_ranks(std::span<const float> values);

/// Mean absolute error after min-max normalizing pred to [0, 1] (a constant
/// pred becomes 0.5 everywhere).
double mae(std::span<const float> pred, std::span<const float> gt);
double mae(const Tensor& pred, const Tensor& gt);

enum class ProbeInput { natural, black, white, noise };
ProbeInput parse_probe_input(std::string_view name);
std::string to_string(ProbeInput kind);

struct ProbeConfig {
  /// Common extent every tapped feature map is resized to.
  std::size_t resize = 16;
  std::size_t epochs = 15;
  float lr = 1e-3f;
  float momentum = 0.9f;
  float weight_decay = 1e-4f;
  std::size_t batch_size = 16;
  PatternKind pattern = PatternKind::HG;
  ProbeInput input = ProbeInput::natural;
  std::uint64_t seed = 0;
};

/// Single 3x3 conv, in_channels -> 1, no padding, no nonlinearity.
Model build_posenet(std::size_t in_channels);

/// Padding policy while extracting probe features. The default is plain eval
/// mode. With `random` set, random padding sites keep drawing (diagnostic):
/// image i uses sample id first_id + i under `seed`.
struct ProbePadding {
  bool random = false;
  std::uint64_t seed = 0;
  std::uint64_t first_id = 0;
};

/// Tapped features of the (frozen) encoder, each resized to resize x resize
/// and concatenated shallow to deep. A null encoder resizes the images
/// themselves (the readout-only baseline).
Tensor assemble_probe_input(Model* encoder, const Tensor& images, std::size_t resize,
                            const ProbePadding& padding = {});

/// assemble_probe_input over a large batch, in chunks to bound memory.
Tensor probe_features(Model* encoder, const Tensor& images, std::size_t resize,
                      const ProbePadding& padding = {});

/// Target map: the pattern at image resolution, resized to the readout extent.
Tensor probe_target(PatternKind pattern, std::size_t image_h, std::size_t image_w,
                    std::size_t readout_extent);

struct ReadoutTraining {
  Model readout;
  /// Per-channel statistics of the training features; the readout sees
  /// standardized inputs.
  ChannelStats input_stats;
  /// Mean training loss per epoch.
  std::vector<double> losses;
};

/// Per-channel mean and standard deviation over (N, H, W). A constant
/// channel gets stddev 1, so it standardizes to zero instead of dividing by 0.
ChannelStats feature_stats(const Tensor& features);

/// Standardizes features with their own statistics, then minimizes MSE
/// between readout(features) and target (1, 1, R-2, R-2) with SGD + momentum.
/// Only the readout is updated. A non-finite loss throws InvalidArgument.
ReadoutTraining train_readout(const Tensor& features, const Tensor& target, const ProbeConfig& cfg);

/// Eval-mode readout prediction, standardizing with the training statistics.
Tensor readout_predict(ReadoutTraining& trained, const Tensor& features);

/// Computes probe inputs from the frozen encoder and trains a readout on them.
ReadoutTraining train_posenet(Model* encoder, const Tensor& images, const ProbeConfig& cfg);

struct ProbeResult {
  std::string encoder_id;
  std::string padding;
  std::string pattern;
  std::string input_kind;
  double spc = 0.0;
  double mae = 0.0;
  std::uint64_t seed = 0;
  /// Predicted map for the first test image, (1, 1, R-2, R-2).
  Tensor example_map;
};

/// Trains a readout on precomputed probe inputs and scores it on the test
/// inputs. image_h/image_w give the resolution the pattern is defined at.
ProbeResult probe_on_features(const Tensor& train_features, const Tensor& test_features,
                              std::size_t image_h, std::size_t image_w, const ProbeConfig& cfg);

/// Trains a readout on train_images and reports SPC and MAE averaged over
/// test_images. Images must already be in the encoder's input space.
ProbeResult run_probe(Model* encoder, const ProbeConfig& cfg, const Tensor& train_images,
                      const Tensor& test_images);

/// Probe images of the requested kind. Natural images are taken from
/// `natural` starting at `offset`; synthetic ones are built at `shape` and
/// normalized with `stats` so they live in the same space as the encoder's
/// training data.
Tensor probe_images(ProbeInput kind, const Tensor& natural, std::size_t offset, std::size_t count,
                    const Shape& sample_shape, const ChannelStats& stats, std::uint64_t seed,
                    std::string_view purpose);

}  // namespace randpad
