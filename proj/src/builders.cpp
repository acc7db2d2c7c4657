#include "randpad/builders.hpp"

#include <memory>

#include "randpad/error.hpp"

namespace randpad {

Architecture parse_architecture(std::string_view name) {
  if (name == "cnn-lite") return Architecture::cnn_lite;
  if (name == "vgg-lite") return Architecture::vgg_lite;
  if (name == "resnet-lite") return Architecture::resnet_lite;
  throw InvalidArgument("unknown architecture '" + std::string(name) + "'");
}

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::cnn_lite: return "cnn-lite";
    case Architecture::vgg_lite: return "vgg-lite";
    case Architecture::resnet_lite: return "resnet-lite";
  }
  return "?";
}

std::size_t padding_layer_count(Architecture arch) {
  switch (arch) {
    case Architecture::cnn_lite: return 2;
    case Architecture::vgg_lite: return 6;
    case Architecture::resnet_lite: return 1 + 3 * ResidualBlock::kPaddingSites;
  }
  return 0;
}

std::size_t max_random_padding_layers(Architecture arch) {
  return arch == Architecture::resnet_lite ? 1 : padding_layer_count(arch);
}

std::size_t spatial_multiple(Architecture arch) {
  switch (arch) {
    case Architecture::cnn_lite: return 4;
    case Architecture::vgg_lite: return 8;
    case Architecture::resnet_lite: return 1;
  }
  return 1;
}

namespace {

std::unique_ptr<Layer> pad_site(const ModelConfig& cfg, std::size_t site) {
  return std::make_unique<PadLayer>(1, site < cfg.rp_layers, site);
}

Model build_cnn_lite(const ModelConfig& cfg) {
  const std::size_t w = cfg.width;
  Model m;
  m.add(pad_site(cfg, 0));
  m.add(std::make_unique<Conv2dLayer>("conv1", cfg.in_channels, w, 3));
  m.add(std::make_unique<ReluLayer>(), "conv1");
  m.add(std::make_unique<MaxPoolLayer>(), "pool1");
  m.add(pad_site(cfg, 1));
  m.add(std::make_unique<Conv2dLayer>("conv2", w, 2 * w, 3));
  m.add(std::make_unique<ReluLayer>(), "conv2");
  m.add(std::make_unique<MaxPoolLayer>(), "pool2");
  m.add(std::make_unique<LinearLayer>("fc", 2 * w * (cfg.in_h / 4) * (cfg.in_w / 4), cfg.classes),
        "logits");
  return m;
}

Model build_vgg_lite(const ModelConfig& cfg) {
  const std::size_t w = cfg.width;
  const std::size_t widths[6] = {w, w, 2 * w, 2 * w, 4 * w, 4 * w};
  // Tap names by block; blocks 2, 4 and 6 are tapped after their pool.
  const char* relu_taps[6] = {"conv1", "", "conv3", "", "", ""};
  const char* pool_taps[3] = {"pool1", "pool2", "pool3"};
  Model m;
  std::size_t in = cfg.in_channels;
  for (std::size_t i = 0; i < 6; ++i) {
    m.add(pad_site(cfg, i));
    m.add(std::make_unique<Conv2dLayer>("conv" + std::to_string(i + 1), in, widths[i], 3));
    m.add(std::make_unique<ReluLayer>(), relu_taps[i]);
    if (i % 2 == 1) m.add(std::make_unique<MaxPoolLayer>(), pool_taps[i / 2]);
    in = widths[i];
  }
  m.add(std::make_unique<LinearLayer>("fc1", 4 * w * (cfg.in_h / 8) * (cfg.in_w / 8), 8 * w));
  m.add(std::make_unique<ReluLayer>());
  m.add(std::make_unique<LinearLayer>("fc2", 8 * w, cfg.classes));
  return m;
}

Model build_resnet_lite(const ModelConfig& cfg) {
  const std::size_t w = cfg.width;
  Model m;
  m.add(pad_site(cfg, 0));
  m.add(std::make_unique<Conv2dLayer>("stem", cfg.in_channels, w, 3, 1, false));
  m.add(std::make_unique<BatchNormLayer>("stem_bn", w));
  m.add(std::make_unique<ReluLayer>(), "stem");
  m.add(std::make_unique<ResidualBlock>("res1", w, w, 1, 1), "res1");
  m.add(std::make_unique<ResidualBlock>("res2", w, 2 * w, 2, 3), "res2");
  m.add(std::make_unique<ResidualBlock>("res3", 2 * w, 4 * w, 2, 5), "res3");
  m.add(std::make_unique<GlobalAvgPoolLayer>(), "pool");
  m.add(std::make_unique<LinearLayer>("fc", 4 * w, cfg.classes));
  return m;
}

}  // namespace

Model build_model(const ModelConfig& cfg) {
  if (cfg.rp_layers > max_random_padding_layers(cfg.arch)) {
    throw InvalidArgument(to_string(cfg.arch) + " supports at most " +
                          std::to_string(max_random_padding_layers(cfg.arch)) +
                          " random padding layers, got rp_layers=" +
                          std::to_string(cfg.rp_layers));
  }
  if (cfg.classes == 0 || cfg.width == 0 || cfg.in_channels == 0) {
    throw InvalidArgument("build_model: classes, width and channels must be positive");
  }
  const std::size_t mult = spatial_multiple(cfg.arch);
  if (cfg.in_h == 0 || cfg.in_w == 0 || cfg.in_h % mult != 0 || cfg.in_w % mult != 0) {
    throw InvalidArgument(to_string(cfg.arch) + " needs input extents divisible by " +
                          std::to_string(mult) + ", got " + std::to_string(cfg.in_h) + "x" +
                          std::to_string(cfg.in_w));
  }
  Model m;
  switch (cfg.arch) {
    case Architecture::cnn_lite: m = build_cnn_lite(cfg); break;
    case Architecture::vgg_lite: m = build_vgg_lite(cfg); break;
    case Architecture::resnet_lite: m = build_resnet_lite(cfg); break;
  }
  initialize_parameters(m, cfg.init_seed);
  return m;
}

}  // namespace randpad
