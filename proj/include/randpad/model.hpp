#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "randpad/layers.hpp"
#include "randpad/padding.hpp"
#include "randpad/tensor.hpp"

namespace randpad {

/// A named tensor owned by a layer. Buffers (batchnorm running statistics)
/// are saved in checkpoints but never touched by the optimizer.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  /// Logical extents written to checkpoints, e.g. {out, in} for a linear weight.
  std::vector<std::uint32_t> dims;
  bool trainable = true;

  Parameter(std::string name, Shape shape, std::vector<std::uint32_t> dims, bool trainable = true);
  void zero_grad();
};

/// Per-call forward settings. In train mode, random padding layers draw from
/// streams keyed by (seed, layer, epoch, sample_ids[i]).
struct ForwardContext {
  Mode mode = Mode::eval;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::span<const std::uint64_t> sample_ids;
  /// Eval mode everywhere except random padding layers, which keep drawing.
  /// Diagnostic only: probes the encoder with its training-time padding.
  bool random_padding_in_eval = false;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, const ForwardContext& ctx) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual void collect_parameters(std::vector<Parameter*>& out) { (void)out; }
  virtual std::string describe() const = 0;
};

/// A padding site: symmetric zero padding, or random padding that falls back
/// to symmetric padding in eval mode.
class PadLayer : public Layer {
 public:
  PadLayer(std::size_t thickness, bool random, std::size_t site);
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override;

  bool random() const { return random_; }
  std::size_t site() const { return site_; }
  const std::vector<PaddingSpec>& last_specs() const { return specs_; }

 private:
  std::size_t thickness_;
  bool random_;
  std::size_t site_;
  std::size_t in_h_ = 0;
  std::size_t in_w_ = 0;
  std::vector<PaddingSpec> specs_;
};

class Conv2dLayer : public Layer {
 public:
  Conv2dLayer(const std::string& name, std::size_t in_channels, std::size_t out_channels,
              std::size_t kernel, std::size_t stride = 1, bool bias = true);
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_parameters(std::vector<Parameter*>& out) override;
  std::string describe() const override;

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
  std::size_t stride_;
  bool has_bias_;
  Tensor input_;
};

class ReluLayer : public Layer {
 public:
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "relu"; }

 private:
  Tensor input_;
};

class MaxPoolLayer : public Layer {
 public:
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "maxpool2x2"; }

 private:
  Shape in_shape_;
  std::vector<std::uint32_t> argmax_;
};

class LinearLayer : public Layer {
 public:
  LinearLayer(const std::string& name, std::size_t in_features, std::size_t out_features);
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_parameters(std::vector<Parameter*>& out) override;
  std::string describe() const override;

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
  Tensor input_;
};

class BatchNormLayer : public Layer {
 public:
  BatchNormLayer(const std::string& name, std::size_t channels);
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_parameters(std::vector<Parameter*>& out) override;
  std::string describe() const override;

 private:
  Parameter gamma_;
  Parameter beta_;
  Parameter running_mean_;
  Parameter running_var_;
  BatchNormCache cache_;
};

class GlobalAvgPoolLayer : public Layer {
 public:
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "global_avg_pool"; }

 private:
  Shape in_shape_;
};

/// relu(bn(conv(pad(relu(bn(conv(pad(x)))))) + shortcut(x)), with a strided
/// 1x1 conv + bn shortcut when the shape changes. Internal padding is always
/// symmetric.
class ResidualBlock : public Layer {
 public:
  ResidualBlock(const std::string& name, std::size_t in_channels, std::size_t out_channels,
                std::size_t stride, std::size_t first_site);
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_parameters(std::vector<Parameter*>& out) override;
  std::string describe() const override;

  static constexpr std::size_t kPaddingSites = 2;

 private:
  std::vector<std::unique_ptr<Layer>> main_;
  std::vector<std::unique_ptr<Layer>> shortcut_;
  Tensor sum_;
  std::string name_;
};

/// A feed-forward stack of layers with optional tap points whose outputs
/// can be read back as features.
class Model {
 public:
  Model() = default;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  void add(std::unique_ptr<Layer> layer, std::string tap_name = {});

  Tensor forward(const Tensor& x, const ForwardContext& ctx);
  /// Returns the gradient with respect to the model input and accumulates
  /// parameter gradients.
  Tensor backward(const Tensor& grad_out);

  /// Outputs of every tap point from one eval-mode forward pass.
  std::vector<Tensor> extract_features(const Tensor& x);
  /// Same, with an explicit eval-mode context (seed, sample ids, and the
  /// random_padding_in_eval diagnostic).
  std::vector<Tensor> extract_features(const Tensor& x, const ForwardContext& ctx);

  /// Trainable parameters in construction order.
  std::vector<Parameter*> parameters();
  /// Every checkpointed tensor (trainable parameters and buffers).
  std::vector<Parameter*> state();
  void zero_grad();

  std::size_t layer_count() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  std::vector<std::string> tap_names() const;
  std::size_t random_padding_sites() const;
  std::string summary() const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<std::string> tap_of_layer_;
  std::vector<Tensor>* capture_ = nullptr;
};

/// Fills every conv/linear weight with He-style fan-in Gaussian values from a
/// stream keyed by the parameter name; biases, beta and running means are
/// zeroed, gamma and running variances set to one.
void initialize_parameters(Model& model, std::uint64_t seed);

}  // namespace randpad
