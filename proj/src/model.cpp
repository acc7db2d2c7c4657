#include "randpad/model.hpp"

#include <cmath>
#include <sstream>

#include "randpad/conv.hpp"
#include "randpad/error.hpp"

namespace randpad {

namespace {

std::span<const float> flat(const Parameter& p) { return p.value.data(); }

void accumulate(Tensor& dst, std::span<const float> src) {
  auto d = dst.data();
  for (std::size_t i = 0; i < src.size(); ++i) d[i] += src[i];
}

}  // namespace

Parameter::Parameter(std::string name_, Shape shape, std::vector<std::uint32_t> dims_,
                     bool trainable_)
    : name(std::move(name_)),
      value(shape),
      grad(shape),
      dims(std::move(dims_)),
      trainable(trainable_) {}

void Parameter::zero_grad() {
  for (float& g : grad.data()) g = 0.0f;
}

// ---------------------------------------------------------------------------

PadLayer::PadLayer(std::size_t thickness, bool random, std::size_t site)
    : thickness_(thickness), random_(random), site_(site) {
  if (thickness == 0) throw InvalidArgument("padding site with zero thickness");
}

Tensor PadLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  in_h_ = x.shape().h;
  in_w_ = x.shape().w;
  if (!random_ || (ctx.mode == Mode::eval && !ctx.random_padding_in_eval)) {
    specs_.assign(x.shape().n, PaddingSpec::symmetric(thickness_));
    return traditional_pad(x, thickness_);
  }
  if (ctx.sample_ids.size() != x.shape().n) {
    throw InvalidArgument("random padding in train mode needs one sample id per batch entry");
  }
  std::vector<RngStream> rngs;
  rngs.reserve(x.shape().n);
  const std::string tag = "random-pad/" + std::to_string(site_);
  for (std::uint64_t id : ctx.sample_ids) rngs.emplace_back(ctx.seed, tag, ctx.epoch, id);
  auto [out, specs] = pad_for_mode(x, thickness_, Mode::train, rngs);
  specs_ = std::move(specs);
  return out;
}

Tensor PadLayer::backward(const Tensor& grad_out) {
  return pad_backward(grad_out, specs_, in_h_, in_w_);
}

std::string PadLayer::describe() const {
  return "pad site=" + std::to_string(site_) + (random_ ? " random" : " zero") +
         " n=" + std::to_string(thickness_);
}

// ---------------------------------------------------------------------------

Conv2dLayer::Conv2dLayer(const std::string& name, std::size_t in_channels,
                         std::size_t out_channels, std::size_t kernel, std::size_t stride,
                         bool bias)
    : weight_(name + ".weight", {out_channels, in_channels, kernel, kernel},
              {static_cast<std::uint32_t>(out_channels), static_cast<std::uint32_t>(in_channels),
               static_cast<std::uint32_t>(kernel), static_cast<std::uint32_t>(kernel)}),
      bias_(name + ".bias", {1, out_channels, 1, 1}, {static_cast<std::uint32_t>(out_channels)}),
      stride_(stride),
      has_bias_(bias) {}

Tensor Conv2dLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  if (ctx.mode == Mode::train) input_ = x;
  return conv2d(x, weight_.value, flat(bias_), stride_);
}

Tensor Conv2dLayer::backward(const Tensor& grad_out) {
  ConvGrads g = conv2d_backward(input_, weight_.value, grad_out, stride_);
  accumulate(weight_.grad, g.grad_w.data());
  if (has_bias_) accumulate(bias_.grad, g.grad_b);
  return std::move(g.grad_x);
}

void Conv2dLayer::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  if (has_bias_) out.push_back(&bias_);
}

std::string Conv2dLayer::describe() const {
  const Shape& s = weight_.value.shape();
  std::ostringstream os;
  os << "conv " << s.c << "->" << s.n << " k=" << s.h << " stride=" << stride_;
  return os.str();
}

// ---------------------------------------------------------------------------

Tensor ReluLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  if (ctx.mode == Mode::train) input_ = x;
  return relu_forward(x);
}

Tensor ReluLayer::backward(const Tensor& grad_out) { return relu_backward(input_, grad_out); }

Tensor MaxPoolLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  MaxPoolResult r = maxpool2x2_forward(x);
  if (ctx.mode == Mode::train) {
    in_shape_ = x.shape();
    argmax_ = std::move(r.argmax);
  }
  return std::move(r.out);
}

Tensor MaxPoolLayer::backward(const Tensor& grad_out) {
  return maxpool2x2_backward(grad_out, argmax_, in_shape_);
}

// ---------------------------------------------------------------------------

LinearLayer::LinearLayer(const std::string& name, std::size_t in_features,
                         std::size_t out_features)
    : weight_(name + ".weight", {out_features, in_features, 1, 1},
              {static_cast<std::uint32_t>(out_features), static_cast<std::uint32_t>(in_features)}),
      bias_(name + ".bias", {1, out_features, 1, 1}, {static_cast<std::uint32_t>(out_features)}) {}

Tensor LinearLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  if (ctx.mode == Mode::train) input_ = x;
  return linear_forward(x, weight_.value, flat(bias_));
}

Tensor LinearLayer::backward(const Tensor& grad_out) {
  LinearGrads g = linear_backward(input_, weight_.value, grad_out);
  accumulate(weight_.grad, g.grad_w.data());
  accumulate(bias_.grad, g.grad_b);
  return std::move(g.grad_x);
}

void LinearLayer::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

std::string LinearLayer::describe() const {
  const Shape& s = weight_.value.shape();
  return "linear " + std::to_string(s.c) + "->" + std::to_string(s.n);
}

// ---------------------------------------------------------------------------

BatchNormLayer::BatchNormLayer(const std::string& name, std::size_t channels)
    : gamma_(name + ".gamma", {1, channels, 1, 1}, {static_cast<std::uint32_t>(channels)}),
      beta_(name + ".beta", {1, channels, 1, 1}, {static_cast<std::uint32_t>(channels)}),
      running_mean_(name + ".running_mean", {1, channels, 1, 1},
                    {static_cast<std::uint32_t>(channels)}, false),
      running_var_(name + ".running_var", {1, channels, 1, 1},
                   {static_cast<std::uint32_t>(channels)}, false) {
  for (float& v : gamma_.value.data()) v = 1.0f;
  for (float& v : running_var_.value.data()) v = 1.0f;
}

Tensor BatchNormLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  if (ctx.mode == Mode::eval) {
    return batchnorm_forward_eval(x, flat(gamma_), flat(beta_), flat(running_mean_),
                                  flat(running_var_));
  }
  return batchnorm_forward_train(x, flat(gamma_), flat(beta_), running_mean_.value.data(),
                                 running_var_.value.data(), cache_);
}

Tensor BatchNormLayer::backward(const Tensor& grad_out) {
  BatchNormGrads g = batchnorm_backward(cache_, flat(gamma_), grad_out);
  accumulate(gamma_.grad, g.grad_gamma);
  accumulate(beta_.grad, g.grad_beta);
  return std::move(g.grad_x);
}

void BatchNormLayer::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

std::string BatchNormLayer::describe() const {
  return "batchnorm " + std::to_string(gamma_.value.shape().c);
}

// ---------------------------------------------------------------------------

Tensor GlobalAvgPoolLayer::forward(const Tensor& x, const ForwardContext& ctx) {
  (void)ctx;
  in_shape_ = x.shape();
  return global_avg_pool_forward(x);
}

Tensor GlobalAvgPoolLayer::backward(const Tensor& grad_out) {
  return global_avg_pool_backward(grad_out, in_shape_);
}

// ---------------------------------------------------------------------------

ResidualBlock::ResidualBlock(const std::string& name, std::size_t in_channels,
                             std::size_t out_channels, std::size_t stride, std::size_t first_site)
    : name_(name) {
  main_.push_back(std::make_unique<PadLayer>(1, false, first_site));
  main_.push_back(std::make_unique<Conv2dLayer>(name + ".conv1", in_channels, out_channels, 3,
                                                stride, false));
  main_.push_back(std::make_unique<BatchNormLayer>(name + ".bn1", out_channels));
  main_.push_back(std::make_unique<ReluLayer>());
  main_.push_back(std::make_unique<PadLayer>(1, false, first_site + 1));
  main_.push_back(
      std::make_unique<Conv2dLayer>(name + ".conv2", out_channels, out_channels, 3, 1, false));
  main_.push_back(std::make_unique<BatchNormLayer>(name + ".bn2", out_channels));
  if (stride != 1 || in_channels != out_channels) {
    shortcut_.push_back(std::make_unique<Conv2dLayer>(name + ".proj", in_channels, out_channels, 1,
                                                      stride, false));
    shortcut_.push_back(std::make_unique<BatchNormLayer>(name + ".proj_bn", out_channels));
  }
}

Tensor ResidualBlock::forward(const Tensor& x, const ForwardContext& ctx) {
  Tensor y = x;
  for (auto& l : main_) y = l->forward(y, ctx);
  Tensor s = x;
  for (auto& l : shortcut_) s = l->forward(s, ctx);
  Tensor sum = add(y, s);
  if (ctx.mode == Mode::train) sum_ = sum;
  return relu_forward(sum);
}

Tensor ResidualBlock::backward(const Tensor& grad_out) {
  Tensor g = relu_backward(sum_, grad_out);
  Tensor gm = g;
  for (auto it = main_.rbegin(); it != main_.rend(); ++it) gm = (*it)->backward(gm);
  Tensor gs = g;
  for (auto it = shortcut_.rbegin(); it != shortcut_.rend(); ++it) gs = (*it)->backward(gs);
  return add(gm, gs);
}

void ResidualBlock::collect_parameters(std::vector<Parameter*>& out) {
  for (auto& l : main_) l->collect_parameters(out);
  for (auto& l : shortcut_) l->collect_parameters(out);
}

std::string ResidualBlock::describe() const {
  std::ostringstream os;
  os << "residual " << name_ << " [";
  for (std::size_t i = 0; i < main_.size(); ++i) os << (i ? "; " : "") << main_[i]->describe();
  os << "]";
  if (!shortcut_.empty()) {
    os << " shortcut [";
    for (std::size_t i = 0; i < shortcut_.size(); ++i) {
      os << (i ? "; " : "") << shortcut_[i]->describe();
    }
    os << "]";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

void Model::add(std::unique_ptr<Layer> layer, std::string tap_name) {
  layers_.push_back(std::move(layer));
  tap_of_layer_.push_back(std::move(tap_name));
}

Tensor Model::forward(const Tensor& x, const ForwardContext& ctx) {
  Tensor y = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    y = layers_[i]->forward(y, ctx);
    if (capture_ != nullptr && !tap_of_layer_[i].empty()) capture_->push_back(y);
  }
  return y;
}

Tensor Model::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<Tensor> Model::extract_features(const Tensor& x) {
  return extract_features(x, ForwardContext{});
}

std::vector<Tensor> Model::extract_features(const Tensor& x, const ForwardContext& ctx) {
  if (tap_names().empty()) throw InvalidArgument("extract_features: model has no tap points");
  if (ctx.mode != Mode::eval) throw InvalidArgument("extract_features runs in eval mode only");
  std::vector<Tensor> taps;
  capture_ = &taps;
  try {
    forward(x, ctx);
  } catch (...) {
    capture_ = nullptr;
    throw;
  }
  capture_ = nullptr;
  return taps;
}

std::vector<Parameter*> Model::state() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) l->collect_parameters(out);
  return out;
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  for (Parameter* p : state()) {
    if (p->trainable) out.push_back(p);
  }
  return out;
}

void Model::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

std::vector<std::string> Model::tap_names() const {
  std::vector<std::string> out;
  for (const auto& t : tap_of_layer_) {
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::size_t Model::random_padding_sites() const {
  std::size_t count = 0;
  for (const auto& l : layers_) {
    if (auto* pad = dynamic_cast<const PadLayer*>(l.get()); pad != nullptr && pad->random()) {
      ++count;
    }
  }
  return count;
}

std::string Model::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    os << i << ": " << layers_[i]->describe();
    if (!tap_of_layer_[i].empty()) os << "  <tap " << tap_of_layer_[i] << ">";
    os << "\n";
  }
  return os.str();
}

void initialize_parameters(Model& model, std::uint64_t seed) {
  for (Parameter* p : model.state()) {
    const auto& name = p->name;
    auto ends_with = [&](std::string_view suffix) {
      return name.size() >= suffix.size() &&
             name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    float fill = 0.0f;
    if (ends_with(".weight")) {
      const Shape& s = p->value.shape();
      const double fan_in = static_cast<double>(s.c * s.h * s.w);
      const double stddev = std::sqrt(2.0 / fan_in);
      RngStream rng(seed, "init/" + name);
      for (float& v : p->value.data()) v = static_cast<float>(rng.normal() * stddev);
      p->zero_grad();
      continue;
    }
    if (ends_with(".gamma") || ends_with(".running_var")) fill = 1.0f;
    for (float& v : p->value.data()) v = fill;
    p->zero_grad();
  }
}

}  // namespace randpad
