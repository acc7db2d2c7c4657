#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "randpad/augment.hpp"
#include "randpad/datasets.hpp"
#include "randpad/model.hpp"

namespace randpad {

struct TrainOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  float lr = 1e-2f;
  float momentum = 0.9f;
  float weight_decay = 1e-4f;
  std::uint64_t seed = 0;
  AugmentPipeline augment;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_error = 0.0;
  double test_error = 0.0;
};

struct TrainResult {
  std::vector<EpochMetrics> history;
  double final_test_error = 0.0;
};

/// Fraction of misclassified samples, eval mode.
double evaluate_error(Model& model, const LabeledDataset& data, std::size_t batch_size = 256);

/// Per-epoch order of sample indices: a Fisher-Yates shuffle keyed on
/// (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, std::size_t epoch);

/// Minibatch SGD with softmax cross-entropy. Each sample's random padding and
/// augmentation draws are keyed on its dataset index, so results do not
/// depend on batch composition or thread count.
TrainResult train_classifier(Model& model, const LabeledDataset& train, const LabeledDataset& test,
                             const TrainOptions& opts,
                             const std::function<void(const EpochMetrics&)>& on_epoch = {});

}  // namespace randpad
