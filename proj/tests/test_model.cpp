#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "randpad/builders.hpp"
#include "randpad/checkpoint.hpp"
#include "randpad/error.hpp"
#include "randpad/layers.hpp"
#include "support/oracles.hpp"

using namespace randpad;

namespace {

ModelConfig small(Architecture arch, std::size_t k) {
  ModelConfig c;
  c.arch = arch;
  c.rp_layers = k;
  c.width = 4;
  c.init_seed = 17;
  if (arch == Architecture::cnn_lite) {
    c.in_h = c.in_w = 12;
  } else {
    c.in_channels = 3;
    c.in_h = c.in_w = 16;
  }
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

constexpr Architecture kArchs[] = {Architecture::cnn_lite, Architecture::vgg_lite,
                                   Architecture::resnet_lite};

}  // namespace

TEST_CASE("padding site counts and K limits") {
  CHECK(padding_layer_count(Architecture::cnn_lite) == 2);
  CHECK(padding_layer_count(Architecture::vgg_lite) == 6);
  CHECK(max_random_padding_layers(Architecture::resnet_lite) == 1);
  CHECK_THROWS_AS(build_model(small(Architecture::resnet_lite, 2)), InvalidArgument);
  CHECK_THROWS_AS(build_model(small(Architecture::cnn_lite, 3)), InvalidArgument);
  CHECK_THROWS_AS(build_model(small(Architecture::vgg_lite, 7)), InvalidArgument);
  ModelConfig odd = small(Architecture::vgg_lite, 0);
  odd.in_h = 28;
  CHECK_THROWS_AS(build_model(odd), InvalidArgument);
  CHECK(parse_architecture("vgg-lite") == Architecture::vgg_lite);
  CHECK_THROWS(parse_architecture("alexnet"));
}

TEST_CASE("random site count follows K") {
  for (Architecture a : kArchs) {
    for (std::size_t k = 0; k <= max_random_padding_layers(a); ++k) {
      Model m = build_model(small(a, k));
      CHECK(m.random_padding_sites() == k);
    }
  }
}

TEST_CASE("logits shape") {
  rp_test::Gen g(1);
  for (Architecture a : kArchs) {
    const ModelConfig c = small(a, 1);
    Model m = build_model(c);
    const Tensor x = rp_test::random_tensor({3, c.in_channels, c.in_h, c.in_w}, g);
    const std::vector<std::uint64_t> ids{0, 1, 2};
    const Tensor y = m.forward(x, {Mode::train, 1, 0, ids});
    CHECK(y.shape() == Shape{3, 10, 1, 1});
    CHECK(all_finite(y));
  }
}

TEST_CASE("initialization does not depend on K") {
  for (Architecture a : kArchs) {
    Model base = build_model(small(a, 0));
    Model rp = build_model(small(a, max_random_padding_layers(a)));
    CHECK(serialize_checkpoint(base) == serialize_checkpoint(rp));
  }
}

TEST_CASE("eval mode: random padding degenerates to zero padding") {
  rp_test::Gen g(2);
  for (Architecture a : kArchs) {
    const ModelConfig c = small(a, 0);
    Model base = build_model(c);
    Model rp = build_model(small(a, max_random_padding_layers(a)));
    const Tensor x = rp_test::random_tensor({4, c.in_channels, c.in_h, c.in_w}, g);
    CHECK(base.forward(x, {}) == rp.forward(x, {}));
  }
}

TEST_CASE("train mode randomness is keyed on sample ids") {
  rp_test::Gen g(3);
  const ModelConfig c = small(Architecture::cnn_lite, 2);
  Model m = build_model(c);
  const Tensor one = rp_test::random_tensor({1, 1, c.in_h, c.in_w}, g);
  std::vector<Tensor> copies(8, one);
  const Tensor x = stack_samples(copies);
  const std::vector<std::uint64_t> ids{0, 1, 2, 3, 4, 5, 6, 7};
  const Tensor a = m.forward(x, {Mode::train, 5, 0, ids});
  const Tensor b = m.forward(x, {Mode::train, 5, 0, ids});
  CHECK(a == b);
  bool any_differ = false;
  for (std::size_t n = 1; n < 8; ++n) {
    if (!std::equal(a.sample(0).begin(), a.sample(0).end(), a.sample(n).begin())) any_differ = true;
  }
  CHECK(any_differ);
  CHECK_THROWS_AS(m.forward(x, {Mode::train, 5, 0, {}}), InvalidArgument);
}

TEST_CASE("K changes only the padding lines of the summary") {
  for (Architecture a : kArchs) {
    const auto base = lines(build_model(small(a, 0)).summary());
    const auto rp = lines(build_model(small(a, 1)).summary());
    REQUIRE(base.size() == rp.size());
    std::size_t diffs = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (base[i] != rp[i]) {
        ++diffs;
        CHECK(base[i].find("pad") != std::string::npos);
        CHECK(rp[i].find("random") != std::string::npos);
      }
    }
    CHECK(diffs == 1);
  }
}

TEST_CASE("feature taps") {
  rp_test::Gen g(4);
  for (Architecture a : kArchs) {
    const ModelConfig c = small(a, 1);
    Model m = build_model(c);
    const Tensor x = rp_test::random_tensor({2, c.in_channels, c.in_h, c.in_w}, g);
    const auto taps = m.extract_features(x);
    REQUIRE(taps.size() == 5);
    for (std::size_t i = 1; i < taps.size(); ++i) {
      CHECK(taps[i].shape().h <= taps[i - 1].shape().h);
      CHECK(taps[i].shape().w <= taps[i - 1].shape().w);
    }
    const auto again = m.extract_features(x);
    for (std::size_t i = 0; i < 5; ++i) CHECK(taps[i] == again[i]);
  }
  Model bare;
  bare.add(std::make_unique<ReluLayer>());
  CHECK_THROWS_AS(bare.extract_features(Tensor({1, 1, 2, 2})), InvalidArgument);
}

TEST_CASE("feature extraction with random padding kept on (diagnostic)") {
  rp_test::Gen g(21);
  const ModelConfig c = small(Architecture::vgg_lite, 6);
  Model rp = build_model(c);
  Model base = build_model(small(Architecture::vgg_lite, 0));
  const Tensor x = rp_test::random_tensor({3, c.in_channels, c.in_h, c.in_w}, g);
  const std::vector<std::uint64_t> ids{0, 1, 2};
  ForwardContext ctx;
  ctx.random_padding_in_eval = true;
  ctx.seed = 4;
  ctx.sample_ids = ids;
  const auto plain = rp.extract_features(x);
  const auto drawn = rp.extract_features(x, ctx);
  CHECK(drawn == rp.extract_features(x, ctx));
  CHECK(drawn.back() != plain.back());
  // Models without random sites ignore the flag.
  CHECK(base.extract_features(x, ctx) == base.extract_features(x));
  ForwardContext train;
  train.mode = Mode::train;
  CHECK_THROWS_AS(rp.extract_features(x, train), InvalidArgument);
}

TEST_CASE("taps of a toy model are the forward intermediates") {
  Model m;
  m.add(std::make_unique<Conv2dLayer>("c", 1, 2, 3), "conv");
  m.add(std::make_unique<ReluLayer>(), "relu");
  initialize_parameters(m, 3);
  rp_test::Gen g(5);
  const Tensor x = rp_test::random_tensor({1, 1, 5, 5}, g);
  const auto taps = m.extract_features(x);
  REQUIRE(taps.size() == 2);
  auto* conv = dynamic_cast<Conv2dLayer*>(&m.layer(0));
  const Tensor pre = conv2d(x, conv->weight().value, conv->bias().value.data());
  CHECK(taps[0] == pre);
  CHECK(taps[1] == relu_forward(pre));
}

TEST_CASE("whole-model gradients agree with finite differences") {
  // Small smooth-ish check through pads, convs, pools, batchnorm and residual
  // adds. Kinks are rare at these magnitudes; the tolerance is loose because
  // relu/max crossings inside a 1e-2 step cannot be excluded for a full net.
  rp_test::Gen g(6);
  for (Architecture a : kArchs) {
    ModelConfig c = small(a, max_random_padding_layers(a));
    c.width = 2;
    Model m = build_model(c);
    const Tensor x = rp_test::random_tensor({2, c.in_channels, c.in_h, c.in_w}, g);
    const std::vector<std::uint64_t> ids{3, 9};
    const std::vector<std::uint32_t> labels{1, 4};
    const ForwardContext ctx{Mode::train, 8, 0, ids};
    m.zero_grad();
    const LossResult l = softmax_cross_entropy(m.forward(x, ctx), labels);
    m.backward(l.grad);
    auto params = m.parameters();
    Parameter* first = params.front();
    std::vector<float> analytic(first->grad.data().begin(), first->grad.data().end());
    auto f = [&] {
      return static_cast<double>(softmax_cross_entropy(m.forward(x, ctx), labels).loss);
    };
    const auto num = rp_test::central_diff(first->value.data(), f, 1e-3f);
    CHECK(rp_test::relative_error(num, analytic) < 2e-2);
  }
}

TEST_CASE("checkpoint round trip is byte identical") {
  const auto dir = std::filesystem::temp_directory_path() / "randpad-ckpt-test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (Architecture a : kArchs) {
    Model m = build_model(small(a, 0));
    save_checkpoint(m, dir / "a.rplb");
    ModelConfig other = small(a, 0);
    other.init_seed = 99;
    Model n = build_model(other);
    CHECK(serialize_checkpoint(n) != serialize_checkpoint(m));
    load_checkpoint(dir / "a.rplb", n);
    save_checkpoint(n, dir / "b.rplb");
    std::ifstream fa(dir / "a.rplb", std::ios::binary);
    std::ifstream fb(dir / "b.rplb", std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(fa)), {});
    const std::string sb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(sa == sb);
  }
  std::filesystem::remove_all(dir);
}

namespace {
std::string load_error(std::span<const std::uint8_t> bytes, Model& m) {
  try {
    deserialize_checkpoint(bytes, m);
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}
}  // namespace

TEST_CASE("checkpoint corruption is reported") {
  Model m = build_model(small(Architecture::cnn_lite, 0));
  const auto good = serialize_checkpoint(m);

  auto magic = good;
  magic[0] = 'X';
  CHECK(load_error(magic, m).find("bad magic at offset 0") != std::string::npos);

  auto version = good;
  version[4] = 2;
  CHECK(load_error(version, m).find("version 2 at offset 4") != std::string::npos);

  auto cut = good;
  cut.resize(good.size() - 3);
  CHECK(load_error(cut, m).find("truncated at offset") != std::string::npos);

  auto extra = good;
  extra.push_back(0);
  CHECK(load_error(extra, m).find("trailing bytes at offset " + std::to_string(good.size())) !=
        std::string::npos);

  // Failed loads leave the model untouched.
  CHECK(serialize_checkpoint(m) == good);
}

TEST_CASE("loading into another architecture names the first offending parameter") {
  Model cnn = build_model(small(Architecture::cnn_lite, 0));
  Model vgg = build_model(small(Architecture::vgg_lite, 0));
  const auto bytes = serialize_checkpoint(cnn);
  const std::string err = load_error(bytes, vgg);
  CHECK(err.find("shape mismatch at offset 12") != std::string::npos);
  CHECK(err.find("conv1.weight") != std::string::npos);

  ModelConfig wide = small(Architecture::cnn_lite, 0);
  wide.width = 8;
  Model w = build_model(wide);
  CHECK(load_error(bytes, w).find("conv1.weight") != std::string::npos);
}
