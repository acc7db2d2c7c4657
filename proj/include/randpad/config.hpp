#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "randpad/builders.hpp"
#include "randpad/datasets.hpp"
#include "randpad/probe.hpp"

namespace randpad {

enum class DatasetKind { fashion_mnist, cifar10, cifar100 };
DatasetKind parse_dataset_kind(std::string_view name);
std::string to_string(DatasetKind kind);

/// One probed encoder: an id for reports, its padding label, and a checkpoint.
struct EncoderSpec {
  std::string id;
  std::string padding;
  std::filesystem::path checkpoint;
};

/// Everything a command reads. Defaults are the desk-scale settings; every
/// field round-trips through the key=value text form.
struct RunConfig {
  DatasetKind dataset = DatasetKind::fashion_mnist;
  std::filesystem::path data_dir;
  /// 0 means the whole split.
  std::size_t train_subset = 10000;
  std::size_t test_subset = 0;

  Architecture arch = Architecture::cnn_lite;
  std::size_t rp_layers = 0;
  std::size_t width = 8;

  std::string augment = "none";
  std::size_t crop_pad = 4;
  double flip_p = 0.5;
  double max_degrees = 30.0;
  double erase_p = 0.5;

  float lr = 1e-3f;
  float momentum = 0.9f;
  float weight_decay = 1e-4f;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  /// Experiments run seeds seed, seed+1, ..., seed+seeds-1.
  std::size_t seeds = 3;

  /// Model to evaluate (eval).
  std::filesystem::path checkpoint;
  /// Encoders to probe (probe): "id:padding:path" entries.
  std::vector<EncoderSpec> encoders;
  /// Add the raw-image readout rows (probe, table1-desk).
  bool probe_baseline = true;
  std::size_t probe_resize = 16;
  std::size_t probe_epochs = 15;
  float probe_lr = 1e-3f;
  float probe_momentum = 0.9f;
  float probe_weight_decay = 1e-4f;
  std::size_t probe_batch_size = 16;
  std::vector<PatternKind> probe_patterns{std::begin(kAllPatterns), std::end(kAllPatterns)};
  std::vector<ProbeInput> probe_inputs{ProbeInput::natural, ProbeInput::black, ProbeInput::white,
                                       ProbeInput::noise};
  std::size_t probe_train_images = 500;
  std::size_t probe_test_images = 100;
  bool dump_maps = true;
  /// Diagnostic: keep random padding active while extracting probe features.
  /// Off means the frozen encoder runs in plain eval mode.
  bool probe_random_padding = false;

  /// Experiment preset: table1-desk, table2-desk or table3-desk.
  std::string preset;
  /// table2-desk architectures.
  std::vector<Architecture> archs{Architecture::cnn_lite, Architecture::vgg_lite,
                                  Architecture::resnet_lite};
  /// table1-desk random-padding encoder: K for the RP encoder, 0 = every site.
  std::size_t encoder_rp_layers = 0;
};

/// Applies one key=value assignment. Unknown keys and malformed values throw
/// ConfigError.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses config text: key = value per line, '#' starts a comment, blank
/// lines ignored. `origin` names the source in error messages.
RunConfig parse_config(std::string_view text, std::string_view origin = "config");
RunConfig load_config(const std::filesystem::path& path);

/// Applies "key=value" overrides in order.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides);

/// Effective value of every key, in a fixed order.
std::vector<std::pair<std::string, std::string>> effective_values(const RunConfig& cfg);

/// The effective values in config-file syntax; parse_config accepts it back.
std::string to_config_text(const RunConfig& cfg);

/// Model config implied by the run config and the dataset's image shape.
ModelConfig model_config(const RunConfig& cfg, Architecture arch, std::size_t rp_layers,
                         std::size_t classes, const Shape& image_shape, std::uint64_t seed);

/// Train/test splits for the configured dataset: subsets taken, padded to
/// the architecture's spatial multiple, and normalized with train statistics.
struct DataSplits {
  LabeledDataset train;
  LabeledDataset test;
};
DataSplits load_splits(const RunConfig& cfg, Architecture arch);

}  // namespace randpad
