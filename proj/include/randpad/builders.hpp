#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "randpad/model.hpp"

namespace randpad {

enum class Architecture { cnn_lite, vgg_lite, resnet_lite };

Architecture parse_architecture(std::string_view name);
std::string to_string(Architecture arch);

struct ModelConfig {
  Architecture arch = Architecture::cnn_lite;
  /// Leading padding sites converted to random padding; 0 is the baseline.
  std::size_t rp_layers = 0;
  std::size_t classes = 10;
  std::size_t in_channels = 1;
  std::size_t in_h = 28;
  std::size_t in_w = 28;
  /// Channel count of the first conv; later stages scale from it.
  std::size_t width = 8;
  std::uint64_t init_seed = 0;
};

/// Padding sites in the architecture, in forward order.
std::size_t padding_layer_count(Architecture arch);
/// Upper bound on rp_layers. Residual shortcuts restrict resnet-lite to the stem.
std::size_t max_random_padding_layers(Architecture arch);
/// Input height and width must be divisible by this for the 2x2 pools.
std::size_t spatial_multiple(Architecture arch);

/// cnn-lite:    2 x [pad, conv3x3, relu, maxpool], linear.
/// vgg-lite:    6 x [pad, conv3x3, relu] with a maxpool after every second,
///              then linear, relu, linear.
/// resnet-lite: pad, conv3x3, bn, relu, three residual blocks (the last two
///              strided), global average pool, linear.
///
/// Every architecture exposes five tap points, shallow to deep. Weights are
/// initialized from cfg.init_seed.
Model build_model(const ModelConfig& cfg);

}  // namespace randpad
