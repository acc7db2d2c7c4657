#include "randpad/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "randpad/error.hpp"
#include "randpad/layers.hpp"
#include "randpad/optim.hpp"
#include "randpad/rng.hpp"

namespace randpad {

std::vector<double> average_ranks(std::span<const float> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 share the mean of ranks i+1..j.
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const float> pred, std::span<const float> gt) {
  if (pred.size() != gt.size()) {
    throw InvalidArgument("spearman: extent mismatch (" + std::to_string(pred.size()) + " vs " +
                          std::to_string(gt.size()) + ")");
  }
  if (pred.size() < 2) throw InvalidArgument("spearman: need at least two elements");
  const auto rp = average_ranks(pred);
  const auto rg = average_ranks(gt);
  const double mean = (static_cast<double>(pred.size()) + 1.0) / 2.0;
  double cov = 0.0;
  double vp = 0.0;
  double vg = 0.0;
  for (std::size_t i = 0; i < rp.size(); ++i) {
    const double a = rp[i] - mean;
    const double b = rg[i] - mean;
    cov += a * b;
    vp += a * a;
    vg += b * b;
  }
  if (vp == 0.0 || vg == 0.0) return 0.0;
  return std::clamp(cov / std::sqrt(vp * vg), -1.0, 1.0);
}

double spearman(const Tensor& pred, const Tensor& gt) {
  if (pred.shape() != gt.shape()) {
    throw InvalidArgument("spearman: " + pred.shape().str() + " vs " + gt.shape().str());
  }
  return spearman(pred.data(), gt.data());
}

double mae(std::span<const float> pred, std::span<const float> gt) {
  if (pred.size() != gt.size()) {
    throw InvalidArgument("mae: extent mismatch (" + std::to_string(pred.size()) + " vs " +
                          std::to_string(gt.size()) + ")");
  }
  if (pred.empty()) throw InvalidArgument("mae: empty maps");
  const auto [lo_it, hi_it] = std::minmax_element(pred.begin(), pred.end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = range > 0.0 ? (pred[i] - lo) / range : 0.5;
    total += std::abs(p - static_cast<double>(gt[i]));
  }
  return total / static_cast<double>(pred.size());
}

double mae(const Tensor& pred, const Tensor& gt) {
  if (pred.shape() != gt.shape()) {
    throw InvalidArgument("mae: " + pred.shape().str() + " vs " + gt.shape().str());
  }
  return mae(pred.data(), gt.data());
}

ProbeInput parse_probe_input(std::string_view name) {
  if (name == "natural") return ProbeInput::natural;
  if (name == "black") return ProbeInput::black;
  if (name == "white") return ProbeInput::white;
  if (name == "noise") return ProbeInput::noise;
  throw InvalidArgument("unknown probe input kind '" + std::string(name) + "'");
}

std::string to_string(ProbeInput kind) {
  switch (kind) {
    case ProbeInput::natural: return "natural";
    case ProbeInput::black: return "black";
    case ProbeInput::white: return "white";
    case ProbeInput::noise: return "noise";
  }
  return "?";
}

Model build_posenet(std::size_t in_channels) {
  if (in_channels == 0) throw InvalidArgument("build_posenet: in_channels must be positive");
  Model m;
  m.add(std::make_unique<Conv2dLayer>("posenet", in_channels, 1, 3));
  return m;
}

// Keeps probe-time padding draws apart from the training epochs' streams.
constexpr std::uint64_t kProbePaddingEpoch = 0xFFFFFFFFull;

Tensor assemble_probe_input(Model* encoder, const Tensor& images, std::size_t resize,
                            const ProbePadding& padding) {
  if (resize < 3) throw InvalidArgument("probe resize extent must be >= 3");
  if (encoder == nullptr) return bilinear_resize(images, resize, resize);
  std::vector<std::uint64_t> ids(images.shape().n);
  std::iota(ids.begin(), ids.end(), padding.first_id);
  ForwardContext ctx;
  ctx.random_padding_in_eval = padding.random;
  ctx.seed = padding.seed;
  ctx.epoch = kProbePaddingEpoch;
  ctx.sample_ids = ids;
  const auto taps = encoder->extract_features(images, ctx);
  std::vector<Tensor> resized;
  resized.reserve(taps.size());
  for (const Tensor& t : taps) resized.push_back(bilinear_resize(t, resize, resize));
  return concat_channels(resized);
}

Tensor probe_target(PatternKind pattern, std::size_t image_h, std::size_t image_w,
                    std::size_t readout_extent) {
  const Tensor full = make_gt_pattern({pattern}, image_h, image_w);
  return bilinear_resize(full, readout_extent, readout_extent);
}

namespace {

constexpr std::size_t kFeatureChunk = 32;

Tensor gather(const Tensor& t, std::span<const std::size_t> idx) {
  const Shape& s = t.shape();
  Tensor out({idx.size(), s.c, s.h, s.w});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto src = t.sample(idx[i]);
    std::copy(src.begin(), src.end(), out.sample(i).begin());
  }
  return out;
}

}  // namespace

Tensor probe_features(Model* encoder, const Tensor& images, std::size_t resize,
                      const ProbePadding& padding) {
  const std::size_t n = images.shape().n;
  std::vector<Tensor> parts;
  for (std::size_t begin = 0; begin < n; begin += kFeatureChunk) {
    const std::size_t count = std::min(kFeatureChunk, n - begin);
    const Shape& s = images.shape();
    auto src = images.data().subspan(begin * s.sample(), count * s.sample());
    Tensor chunk({count, s.c, s.h, s.w}, std::vector<float>(src.begin(), src.end()));
    ProbePadding chunk_padding = padding;
    chunk_padding.first_id += begin;
    parts.push_back(assemble_probe_input(encoder, chunk, resize, chunk_padding));
  }
  return stack_samples(parts);
}

ChannelStats feature_stats(const Tensor& features) {
  const Shape& s = features.shape();
  ChannelStats st;
  const auto count = static_cast<double>(s.n * s.plane());
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      for (float v : features.plane(n, c)) sum += v;
    }
    const double mean = count > 0 ? sum / count : 0.0;
    double sq = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      for (float v : features.plane(n, c)) sq += (v - mean) * (v - mean);
    }
    const double sd = count > 0 ? std::sqrt(sq / count) : 0.0;
    st.mean.push_back(static_cast<float>(mean));
    st.stddev.push_back(sd > 1e-6 ? static_cast<float>(sd) : 1.0f);
  }
  return st;
}

ReadoutTraining train_readout(const Tensor& raw_features, const Tensor& target,
                              const ProbeConfig& cfg) {
  const Shape& fs = raw_features.shape();
  if (fs.n == 0) throw InvalidArgument("train_readout: empty training set");
  if (cfg.epochs == 0) throw InvalidArgument("train_readout: epochs must be >= 1");
  if (cfg.batch_size == 0) throw InvalidArgument("train_readout: batch size must be >= 1");
  const Shape ts{1, 1, fs.h - 2, fs.w - 2};
  if (target.shape() != ts) {
    throw InvalidArgument("train_readout: target " + target.shape().str() + ", expected " +
                          ts.str());
  }

  ReadoutTraining out{build_posenet(fs.c), feature_stats(raw_features), {}};
  const Tensor features = normalize_images(raw_features, out.input_stats);
  initialize_parameters(out.readout, cfg.seed);
  OptimizerState opt{cfg.lr, cfg.momentum, cfg.weight_decay, {}};
  auto params = out.readout.parameters();

  std::vector<std::size_t> order(fs.n);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    RngStream rng(cfg.seed, "probe-shuffle", epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    double total = 0.0;
    for (std::size_t begin = 0; begin < fs.n; begin += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, fs.n - begin);
      const Tensor batch = gather(features, std::span(order).subspan(begin, count));
      ForwardContext ctx;
      ctx.mode = Mode::train;
      const Tensor pred = out.readout.forward(batch, ctx);
      Tensor tgt(pred.shape());
      for (std::size_t n = 0; n < count; ++n) {
        std::copy(target.data().begin(), target.data().end(), tgt.sample(n).begin());
      }
      LossResult loss = mse_loss(pred, tgt);
      if (!std::isfinite(loss.loss)) {
        throw InvalidArgument("readout training diverged in epoch " + std::to_string(epoch + 1) +
                              " (lr " + std::to_string(cfg.lr) + "); lower the probe learning rate");
      }
      total += static_cast<double>(loss.loss) * static_cast<double>(count);
      out.readout.backward(loss.grad);
      sgd_step(params, opt);
    }
    out.losses.push_back(total / static_cast<double>(fs.n));
  }
  return out;
}

Tensor readout_predict(ReadoutTraining& trained, const Tensor& features) {
  ForwardContext ctx;
  ctx.mode = Mode::eval;
  return trained.readout.forward(normalize_images(features, trained.input_stats), ctx);
}

ReadoutTraining train_posenet(Model* encoder, const Tensor& images, const ProbeConfig& cfg) {
  if (images.shape().n == 0) throw InvalidArgument("train_posenet: empty dataset");
  if (cfg.resize < 3) throw InvalidArgument("probe resize extent must be >= 3");
  const Tensor features = probe_features(encoder, images, cfg.resize);
  const Tensor target =
      probe_target(cfg.pattern, images.shape().h, images.shape().w, cfg.resize - 2);
  return train_readout(features, target, cfg);
}

ProbeResult probe_on_features(const Tensor& train_features, const Tensor& test_features,
                              std::size_t image_h, std::size_t image_w, const ProbeConfig& cfg) {
  if (test_features.shape().n == 0) throw InvalidArgument("probe: no test images");
  const Tensor target = probe_target(cfg.pattern, image_h, image_w, cfg.resize - 2);
  ReadoutTraining trained = train_readout(train_features, target, cfg);
  const Tensor pred = readout_predict(trained, test_features);

  ProbeResult r;
  r.pattern = to_string(cfg.pattern);
  r.input_kind = to_string(cfg.input);
  r.seed = cfg.seed;
  double spc = 0.0;
  double err = 0.0;
  for (std::size_t n = 0; n < pred.shape().n; ++n) {
    spc += spearman(pred.sample(n), target.data());
    err += mae(pred.sample(n), target.data());
  }
  r.spc = spc / static_cast<double>(pred.shape().n);
  r.mae = err / static_cast<double>(pred.shape().n);
  r.example_map = pred.sample_tensor(0);
  return r;
}

ProbeResult run_probe(Model* encoder, const ProbeConfig& cfg, const Tensor& train_images,
                      const Tensor& test_images) {
  if (train_images.shape().n == 0) throw InvalidArgument("run_probe: empty training set");
  if (test_images.shape().n == 0) throw InvalidArgument("run_probe: no test images");
  return probe_on_features(probe_features(encoder, train_images, cfg.resize),
                           probe_features(encoder, test_images, cfg.resize),
                           test_images.shape().h, test_images.shape().w, cfg);
}

Tensor probe_images(ProbeInput kind, const Tensor& natural, std::size_t offset, std::size_t count,
                    const Shape& sample_shape, const ChannelStats& stats, std::uint64_t seed,
                    std::string_view purpose) {
  if (kind == ProbeInput::natural) {
    const Shape& s = natural.shape();
    if (offset + count > s.n) {
      throw InvalidArgument("probe_images: need " + std::to_string(offset + count) +
                            " natural images, have " + std::to_string(s.n));
    }
    auto src = natural.data().subspan(offset * s.sample(), count * s.sample());
    return Tensor({count, s.c, s.h, s.w}, std::vector<float>(src.begin(), src.end()));
  }
  const Shape one{1, sample_shape.c, sample_shape.h, sample_shape.w};
  std::vector<Tensor> images;
  images.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RngStream rng(seed, purpose, 0, offset + i);
    SyntheticKind sk = kind == ProbeInput::black   ? SyntheticKind::black
                       : kind == ProbeInput::white ? SyntheticKind::white
                                                   : SyntheticKind::noise;
    images.push_back(normalize_images(make_synthetic(sk, one, &rng), stats));
  }
  return stack_samples(images);
}

}  // namespace randpad
