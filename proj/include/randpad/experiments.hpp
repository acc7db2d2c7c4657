#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "randpad/config.hpp"
#include "randpad/probe.hpp"
#include "randpad/train.hpp"

namespace randpad {

using Logger = std::function<void(const std::string&)>;

/// One classifier training run and its outcome.
struct ClassifierRun {
  Architecture arch = Architecture::cnn_lite;
  std::size_t rp_layers = 0;
  std::string augment = "none";
  std::uint64_t seed = 0;
  TrainResult result;
};

TrainOptions train_options(const RunConfig& cfg, const std::string& augment, std::uint64_t seed);

/// Builds, initializes (init seed = seed) and trains one model on `data`.
/// The trained model is moved into *trained when given.
ClassifierRun run_classifier(const RunConfig& cfg, const DataSplits& data, Architecture arch,
                             std::size_t rp_layers, const std::string& augment, std::uint64_t seed,
                             const Logger& log, Model* trained = nullptr);

/// K values swept for an architecture by table2-desk: 0..3, capped at the
/// architecture's random-padding limit.
std::vector<std::size_t> table2_sweep(Architecture arch);

/// Augmentation combinations of table3-desk, in report order.
const std::vector<std::string>& table3_combos();

std::vector<ClassifierRun> run_table2(const RunConfig& cfg, const Logger& log);
std::vector<ClassifierRun> run_table3(const RunConfig& cfg, const Logger& log);

/// An encoder ready to probe; model == nullptr is the raw-image baseline.
struct ProbeEncoder {
  std::string id;
  std::string padding;
  Model* model = nullptr;
};

/// Probe grid: encoders x patterns x input kinds, rows in that nesting order.
/// Natural inputs come from data.test (first probe_train_images train the
/// readout, the next probe_test_images score it); synthetic inputs are
/// generated at the same shape and normalized with the train statistics.
std::vector<ProbeResult> probe_grid(const RunConfig& cfg, const DataSplits& data,
                                    const std::vector<ProbeEncoder>& encoders, std::uint64_t seed,
                                    const Logger& log);

/// Label used for the raw-image readout rows.
inline constexpr const char* kBaselineEncoderId = "raw-image";

/// table1-desk: per seed, trains a traditional and a random-padding encoder
/// (identical except padding), then probes both plus the baseline. Trained
/// encoders are saved under encoder_dir when it is non-empty.
std::vector<ProbeResult> run_table1(const RunConfig& cfg, const Logger& log,
                                    const std::filesystem::path& encoder_dir = {});

/// Mean and sample standard deviation.
struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};
MeanStd mean_std(const std::vector<double>& values);

}  // namespace randpad
