#include "randpad/experiments.hpp"

#include <cmath>
#include <numeric>

#include "randpad/checkpoint.hpp"
#include "randpad/error.hpp"
#include "randpad/report.hpp"

namespace randpad {

namespace {

AugmentParams augment_params(const RunConfig& cfg, const ChannelStats& stats) {
  AugmentParams p;
  p.crop_pad = cfg.crop_pad;
  p.flip_p = cfg.flip_p;
  p.max_degrees = cfg.max_degrees;
  p.erase.p = cfg.erase_p;
  // Erasing noise spans the normalized image range [(0-m)/s, (1-m)/s].
  for (std::size_t c = 0; c < stats.mean.size(); ++c) {
    p.erase.fill_lo.push_back(-stats.mean[c] / stats.stddev[c]);
    p.erase.fill_hi.push_back((1.0f - stats.mean[c]) / stats.stddev[c]);
  }
  return p;
}

std::string run_label(Architecture arch, std::size_t k, const std::string& augment,
                      std::uint64_t seed) {
  return to_string(arch) + " K=" + std::to_string(k) + " aug=" + augment +
         " seed=" + std::to_string(seed);
}

}  // namespace

TrainOptions train_options(const RunConfig& cfg, const std::string& augment, std::uint64_t seed) {
  TrainOptions o;
  o.epochs = cfg.epochs;
  o.batch_size = cfg.batch_size;
  o.lr = cfg.lr;
  o.momentum = cfg.momentum;
  o.weight_decay = cfg.weight_decay;
  o.seed = seed;
  o.augment = AugmentPipeline::parse(augment);
  return o;
}

ClassifierRun run_classifier(const RunConfig& cfg, const DataSplits& data, Architecture arch,
                             std::size_t rp_layers, const std::string& augment, std::uint64_t seed,
                             const Logger& log, Model* trained) {
  const ModelConfig mc =
      model_config(cfg, arch, rp_layers, data.train.class_count, data.train.images.shape(), seed);
  Model model = build_model(mc);
  TrainOptions opts = train_options(cfg, augment, seed);
  opts.augment = AugmentPipeline::parse(augment, augment_params(cfg, data.train.normalization));

  const std::string label = run_label(arch, rp_layers, opts.augment.str(), seed);
  ClassifierRun run{arch, rp_layers, opts.augment.str(), seed, {}};
  run.result = train_classifier(model, data.train, data.test, opts, [&](const EpochMetrics& m) {
    if (log) {
      log(label + " epoch " + std::to_string(m.epoch + 1) + "/" + std::to_string(opts.epochs) +
          " train_loss=" + format_fixed(m.train_loss) + " test_error=" + format_fixed(m.test_error));
    }
  });
  if (trained != nullptr) *trained = std::move(model);
  return run;
}

std::vector<std::size_t> table2_sweep(Architecture arch) {
  std::vector<std::size_t> ks;
  for (std::size_t k = 0; k <= std::min<std::size_t>(3, max_random_padding_layers(arch)); ++k) {
    ks.push_back(k);
  }
  return ks;
}

const std::vector<std::string>& table3_combos() {
  static const std::vector<std::string> combos{"none",  "rc",    "rr",    "rf",      "re",
                                               "rf,re", "rc,re", "rc,rf", "rc,rf,re"};
  return combos;
}

std::vector<ClassifierRun> run_table2(const RunConfig& cfg, const Logger& log) {
  std::vector<ClassifierRun> runs;
  for (Architecture arch : cfg.archs) {
    const DataSplits data = load_splits(cfg, arch);
    for (std::size_t k : table2_sweep(arch)) {
      for (std::size_t s = 0; s < cfg.seeds; ++s) {
        runs.push_back(run_classifier(cfg, data, arch, k, cfg.augment, cfg.seed + s, log));
      }
    }
  }
  return runs;
}

std::vector<ClassifierRun> run_table3(const RunConfig& cfg, const Logger& log) {
  const Architecture arch = Architecture::vgg_lite;
  const DataSplits data = load_splits(cfg, arch);
  const std::size_t rp_on = std::min<std::size_t>(2, max_random_padding_layers(arch));
  std::vector<ClassifierRun> runs;
  for (const std::string& combo : table3_combos()) {
    for (std::size_t k : {std::size_t{0}, rp_on}) {
      for (std::size_t s = 0; s < cfg.seeds; ++s) {
        runs.push_back(run_classifier(cfg, data, arch, k, combo, cfg.seed + s, log));
      }
    }
  }
  return runs;
}

std::vector<ProbeResult> probe_grid(const RunConfig& cfg, const DataSplits& data,
                                    const std::vector<ProbeEncoder>& encoders, std::uint64_t seed,
                                    const Logger& log) {
  const Tensor& natural = data.test.images;
  const Shape& shape = natural.shape();
  const std::size_t n_train = cfg.probe_train_images;
  const std::size_t n_test = cfg.probe_test_images;
  const ChannelStats& stats = data.train.normalization;

  std::vector<ProbeResult> rows;
  for (const ProbeEncoder& enc : encoders) {
    for (ProbeInput input : cfg.probe_inputs) {
      const Tensor train_images =
          probe_images(input, natural, 0, n_train, shape, stats, seed, "probe-train");
      const Tensor test_images =
          probe_images(input, natural, n_train, n_test, shape, stats, seed, "probe-test");
      // Features depend only on (encoder, input kind); reuse across patterns.
      const ProbePadding train_pad{cfg.probe_random_padding, seed, 0};
      const ProbePadding test_pad{cfg.probe_random_padding, seed, n_train};
      const Tensor train_features =
          probe_features(enc.model, train_images, cfg.probe_resize, train_pad);
      const Tensor test_features =
          probe_features(enc.model, test_images, cfg.probe_resize, test_pad);
      for (PatternKind pattern : cfg.probe_patterns) {
        ProbeConfig pc;
        pc.resize = cfg.probe_resize;
        pc.epochs = cfg.probe_epochs;
        pc.lr = cfg.probe_lr;
        pc.momentum = cfg.probe_momentum;
        pc.weight_decay = cfg.probe_weight_decay;
        pc.batch_size = cfg.probe_batch_size;
        pc.pattern = pattern;
        pc.input = input;
        pc.seed = seed;
        ProbeResult r = probe_on_features(train_features, test_features, shape.h, shape.w, pc);
        r.encoder_id = enc.id;
        r.padding = enc.padding;
        if (log) {
          log("probe " + enc.id + " " + r.pattern + " " + r.input_kind +
              " spc=" + format_fixed(r.spc) + " mae=" + format_fixed(r.mae));
        }
        rows.push_back(std::move(r));
      }
    }
  }
  // Grid order is encoder, pattern, input; features were computed input-major.
  std::vector<ProbeResult> ordered;
  ordered.reserve(rows.size());
  const std::size_t np = cfg.probe_patterns.size();
  const std::size_t ni = cfg.probe_inputs.size();
  for (std::size_t e = 0; e < encoders.size(); ++e)
    for (std::size_t p = 0; p < np; ++p)
      for (std::size_t i = 0; i < ni; ++i) ordered.push_back(rows[(e * ni + i) * np + p]);
  return ordered;
}

std::vector<ProbeResult> run_table1(const RunConfig& cfg, const Logger& log,
                                    const std::filesystem::path& encoder_dir) {
  const Architecture arch = Architecture::vgg_lite;
  const std::size_t rp_k =
      cfg.encoder_rp_layers == 0 ? max_random_padding_layers(arch) : cfg.encoder_rp_layers;
  if (rp_k > max_random_padding_layers(arch)) {
    throw ConfigError("encoder_rp_layers " + std::to_string(rp_k) + " exceeds the " +
                      std::to_string(max_random_padding_layers(arch)) + " padding sites of " +
                      to_string(arch));
  }
  const DataSplits data = load_splits(cfg, arch);
  std::vector<ProbeResult> rows;
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    const std::uint64_t seed = cfg.seed + s;
    Model traditional;
    Model random;
    run_classifier(cfg, data, arch, 0, cfg.augment, seed, log, &traditional);
    run_classifier(cfg, data, arch, rp_k, cfg.augment, seed, log, &random);
    if (!encoder_dir.empty()) {
      save_checkpoint(traditional, encoder_dir / ("vgg-lite_seed" + std::to_string(seed) + ".rplb"));
      save_checkpoint(random, encoder_dir / ("vgg-lite-rp_seed" + std::to_string(seed) + ".rplb"));
    }
    std::vector<ProbeEncoder> encoders{{"vgg-lite", "traditional", &traditional},
                                       {"vgg-lite-rp", "random", &random}};
    if (cfg.probe_baseline) encoders.push_back({kBaselineEncoderId, "none", nullptr});
    auto grid = probe_grid(cfg, data, encoders, seed, log);
    rows.insert(rows.end(), std::make_move_iterator(grid.begin()),
                std::make_move_iterator(grid.end()));
  }
  return rows;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd m;
  m.count = values.size();
  if (values.empty()) return m;
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

}  // namespace randpad
