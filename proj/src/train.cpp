#include "randpad/train.hpp"

#include <algorithm>
#include <numeric>

#include "randpad/error.hpp"
#include "randpad/layers.hpp"
#include "randpad/optim.hpp"
#include "randpad/rng.hpp"

namespace randpad {

namespace {

Tensor slice_samples(const Tensor& t, std::size_t begin, std::size_t count) {
  const Shape& s = t.shape();
  auto src = t.data().subspan(begin * s.sample(), count * s.sample());
  return Tensor({count, s.c, s.h, s.w}, std::vector<float>(src.begin(), src.end()));
}

}  // namespace

double evaluate_error(Model& model, const LabeledDataset& data, std::size_t batch_size) {
  const std::size_t n = data.images.shape().n;
  if (n == 0) throw InvalidArgument("evaluate_error: empty dataset");
  if (batch_size == 0) throw InvalidArgument("evaluate_error: batch size must be >= 1");
  std::size_t wrong = 0;
  ForwardContext ctx;
  ctx.mode = Mode::eval;
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t count = std::min(batch_size, n - begin);
    const Tensor logits = model.forward(slice_samples(data.images, begin, count), ctx);
    const auto pred = argmax_classes(logits);
    for (std::size_t i = 0; i < count; ++i) {
      if (pred[i] != data.labels[begin + i]) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(n);
}

std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed, "shuffle", epoch);
  for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  return order;
}

TrainResult train_classifier(Model& model, const LabeledDataset& train, const LabeledDataset& test,
                             const TrainOptions& opts,
                             const std::function<void(const EpochMetrics&)>& on_epoch) {
  const Shape& s = train.images.shape();
  if (s.n == 0) throw InvalidArgument("train_classifier: empty training set");
  if (opts.batch_size == 0) throw InvalidArgument("train_classifier: batch size must be >= 1");
  if (train.labels.size() != s.n) throw InvalidArgument("train_classifier: label count mismatch");

  OptimizerState opt{opts.lr, opts.momentum, opts.weight_decay, {}};
  auto params = model.parameters();
  TrainResult result;

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    const auto order = epoch_order(s.n, opts.seed, epoch);
    double loss_sum = 0.0;
    std::size_t wrong = 0;
    for (std::size_t begin = 0; begin < s.n; begin += opts.batch_size) {
      const std::size_t count = std::min(opts.batch_size, s.n - begin);
      Tensor batch({count, s.c, s.h, s.w});
      std::vector<std::uint32_t> labels(count);
      std::vector<std::uint64_t> ids(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t idx = order[begin + i];
        auto src = train.images.sample(idx);
        std::copy(src.begin(), src.end(), batch.sample(i).begin());
        labels[i] = train.labels[idx];
        ids[i] = idx;
      }
      if (!opts.augment.empty()) {
        batch = opts.augment.apply_batch(batch, opts.seed, epoch, ids);
      }
      ForwardContext ctx{Mode::train, opts.seed, epoch, ids};
      const Tensor logits = model.forward(batch, ctx);
      LossResult loss = softmax_cross_entropy(logits, labels);
      const auto pred = argmax_classes(logits);
      for (std::size_t i = 0; i < count; ++i) wrong += pred[i] != labels[i] ? 1 : 0;
      loss_sum += static_cast<double>(loss.loss) * static_cast<double>(count);
      model.backward(loss.grad);
      sgd_step(params, opt);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(s.n);
    m.train_error = static_cast<double>(wrong) / static_cast<double>(s.n);
    m.test_error = evaluate_error(model, test);
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  result.final_test_error = result.history.empty() ? evaluate_error(model, test)
                                                   : result.history.back().test_error;
  return result;
}

}  // namespace randpad
