// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "randpad/builders.hpp"
#include "randpad/checkpoint.hpp"
#include "randpad/commands.hpp"
#include "randpad/datasets.hpp"
#include "randpad/error.hpp"
#include "randpad/experiments.hpp"
#include "randpad/padding.hpp"
#include "randpad/probe.hpp"
#include "randpad/report.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace randpad;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int decimals = 4) { return format_fixed(v, decimals); }

/// Fails the criterion with a message; collected instead of aborting so the
/// line still reports everything checked.
class Checks {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && first_failure_.empty()) first_failure_ = what;
    ok_ = ok_ && ok;
  }
  bool ok() const { return ok_; }
  const std::string& failure() const { return first_failure_; }

 private:
  bool ok_ = true;
  std::string first_failure_;
};

Outcome finish(const Checks& c, const std::string& summary) {
  return {c.ok(), c.ok() ? summary : summary + "; first failure: " + c.failure()};
}

// 1. Padding algebra.
Outcome criterion_1() {
  const auto t0 = Clock::now();
  rp_test::Gen g(101);
  Checks c;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t w = rp_test::pick(g, 2, 64);
    const std::size_t h = rp_test::pick(g, 2, 64);
    const std::size_t n = rp_test::pick(g, 1, 3);
    RngStream rng(7, "acceptance-1", 0, static_cast<std::uint64_t>(i));
    const PaddingSpec spec = sample_padding_spec(n, rng);
    const std::string tag = "case " + std::to_string(i) + " spec " + spec.str();
    c.require(spec.left + spec.right == 2 * n, tag + ": l+r != 2n");
    c.require(spec.top + spec.bottom == 2 * n, tag + ": t+b != 2n");
    const Tensor x = rp_test::random_tensor({1, rp_test::pick(g, 1, 3), h, w}, g);
    const Tensor padded = apply_pad(x, spec);
    c.require(padded.shape() == traditional_pad(x, n).shape(), tag + ": extent differs");
    const Tensor back = slice_spatial(padded, spec.top, spec.left, h, w);
    c.require(back.shape() == x.shape() &&
                  std::memcmp(back.data().data(), x.data().data(), x.numel() * sizeof(float)) == 0,
              tag + ": slice does not recover the input");
  }
  const double t = seconds_since(t0);
  c.require(t < 1.0, "runtime " + fmt(t, 3) + " s >= 1 s");
  return finish(c, "1000 cases, l+r = t+b = 2n, extents match, slices bit-exact, " + fmt(t, 3) + " s");
}

// 2. Padding randomness.
Outcome criterion_2() {
  const auto t0 = Clock::now();
  Checks c;
  constexpr int kDraws = 10000;
  std::array<int, 4> counts{};
  RngStream rng(2024, "acceptance-2-draws");
  for (int i = 0; i < kDraws; ++i) ++counts[draw_padding_option(rng)];
  std::string freq;
  for (std::size_t k = 0; k < 4; ++k) {
    const double f = counts[k] / static_cast<double>(kDraws);
    freq += (k ? "," : "") + fmt(f, 4);
    c.require(std::fabs(f - 0.25) <= 0.02, "option " + std::to_string(k) + " frequency " + fmt(f));
  }
  // sample_padding_spec consumes exactly these draws.
  RngStream a(5, "acceptance-2-consume");
  RngStream b(5, "acceptance-2-consume");
  const std::array<std::size_t, 2> rows{draw_padding_option(b), draw_padding_option(b)};
  c.require(sample_padding_spec(1, a) == accumulate_padding_options(rows),
            "sample_padding_spec does not accumulate draw_padding_option draws");

  const auto exact = rp_test::enumerate_left_distribution(2);
  // The enumeration itself is Binomial(4, 1/2).
  const std::array<double, 5> binom{1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
  for (std::size_t k = 0; k < 5; ++k) {
    c.require(std::fabs(exact[k] - binom[k]) < 1e-12, "enumeration differs from Binomial(4,1/2)");
  }
  std::array<int, 5> left{};
  for (int i = 0; i < kDraws; ++i) {
    RngStream s(2024, "acceptance-2-spec", 0, static_cast<std::uint64_t>(i));
    ++left[sample_padding_spec(2, s).left];
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < 5; ++k) tv += std::fabs(left[k] / static_cast<double>(kDraws) - exact[k]);
  tv /= 2.0;
  c.require(tv < 0.02, "total variation " + fmt(tv));
  const double t = seconds_since(t0);
  c.require(t < 5.0, "runtime " + fmt(t, 3) + " s >= 5 s");
  return finish(c, "option frequencies " + freq + ", n=2 left-count TV " + fmt(tv) + ", " +
                       fmt(t, 3) + " s");
}

// 3. Gradient oracle.
Outcome criterion_3() {
  const auto t0 = Clock::now();
  Checks c;
  rp_test::Gen g(303);
  constexpr int kShapes = 25;
  const std::vector<std::pair<std::string, std::function<double(rp_test::Gen&)>>> ops{
      {"conv2d", rp_test::gradcheck_conv},
      {"linear", rp_test::gradcheck_linear},
      {"maxpool", rp_test::gradcheck_maxpool},
      {"batchnorm", rp_test::gradcheck_batchnorm},
      {"softmax-xent", rp_test::gradcheck_softmax_xent},
      {"apply_pad", rp_test::gradcheck_pad}};
  std::string worst_list;
  for (const auto& [name, check] : ops) {
    double worst = 0.0;
    for (int i = 0; i < kShapes; ++i) worst = std::max(worst, check(g));
    c.require(worst < 1e-3, name + " relative error " + fmt(worst, 6));
    worst_list += (worst_list.empty() ? "" : ", ") + name + " " + format_fixed(worst, 6);
  }
  const double t = seconds_since(t0);
  c.require(t < 60.0, "runtime " + fmt(t, 2) + " s >= 60 s");
  return finish(c, std::to_string(kShapes) + " shapes per op, worst relative error: " + worst_list +
                       ", " + fmt(t, 2) + " s");
}

// 4. Metric oracles.
Outcome criterion_4() {
  const auto t0 = Clock::now();
  Checks c;
  rp_test::Gen g(404);
  double worst_free = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = rp_test::pick(g, 3, 200);
    const Tensor a = rp_test::distinct_tensor({1, 1, 1, n}, g, 1e-3f);
    const Tensor b = rp_test::distinct_tensor({1, 1, 1, n}, g, 1e-3f);
    worst_free = std::max(worst_free, std::fabs(spearman(a.data(), b.data()) -
                                                rp_test::spearman_rank_formula(a.data(), b.data())));
  }
  c.require(worst_free < 1e-9, "tie-free deviation " + std::to_string(worst_free));

  double worst_ties = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = rp_test::pick(g, 3, 100);
    std::vector<float> a(n);
    std::vector<float> b(n);
    for (auto& v : a) v = static_cast<float>(rp_test::pick(g, 0, 5));
    for (auto& v : b) v = static_cast<float>(rp_test::pick(g, 0, 5));
    const auto ra = rp_test::brute_force_ranks(a);
    c.require(average_ranks(a) == ra, "average ranks differ from brute-force ranks");
    const double expect = rp_test::pearson(ra, rp_test::brute_force_ranks(b));
    worst_ties = std::max(worst_ties, std::fabs(spearman(a, b) - expect));
  }
  c.require(worst_ties < 1e-9, "tied deviation " + std::to_string(worst_ties));
  const std::vector<float> flat(10, 2.0f);
  const std::vector<float> ramp{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  c.require(spearman(flat, ramp) == 0.0, "constant map should score 0");

  double worst_mae = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = rp_test::pick(g, 2, 200);
    const Tensor p = rp_test::random_tensor({1, 1, 1, n}, g, -5.0f, 5.0f);
    const Tensor q = rp_test::random_tensor({1, 1, 1, n}, g, 0.0f, 1.0f);
    double lo = p.data()[0];
    double hi = p.data()[0];
    for (float v : p.data()) {
      lo = std::min(lo, static_cast<double>(v));
      hi = std::max(hi, static_cast<double>(v));
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sum += std::fabs((p.data()[k] - lo) / (hi - lo) - q.data()[k]);
    }
    worst_mae = std::max(worst_mae, std::fabs(mae(p.data(), q.data()) - sum / static_cast<double>(n)));
  }
  c.require(worst_mae < 1e-9, "mae deviation " + std::to_string(worst_mae));
  const double t = seconds_since(t0);
  c.require(t < 5.0, "runtime " + fmt(t, 3) + " s >= 5 s");
  std::ostringstream s;
  s << "spearman vs rank formula max dev " << worst_free << ", with ties vs brute-force ranks "
    << worst_ties << ", mae max dev " << worst_mae << ", " << fmt(t, 3) << " s";
  return finish(c, s.str());
}

// 5. Eval-mode degeneracy.
Outcome criterion_5() {
  Checks c;
  rp_test::Gen g(505);
  std::size_t compared = 0;
  for (Architecture arch : {Architecture::cnn_lite, Architecture::vgg_lite, Architecture::resnet_lite}) {
    ModelConfig base;
    base.arch = arch;
    base.in_channels = arch == Architecture::cnn_lite ? 1 : 3;
    base.in_h = base.in_w = arch == Architecture::cnn_lite ? 28 : 32;
    base.init_seed = 11;
    Model reference = build_model(base);
    const Tensor x = rp_test::random_tensor({4, base.in_channels, base.in_h, base.in_w}, g, -2.0f, 2.0f);
    ForwardContext eval;
    eval.mode = Mode::eval;
    const Tensor y0 = reference.forward(x, eval);
    const auto weights = serialize_checkpoint(reference);
    for (std::size_t k = 1; k <= max_random_padding_layers(arch); ++k) {
      ModelConfig rc = base;
      rc.rp_layers = k;
      rc.init_seed = 99;  // overwritten below: same weights come from the checkpoint
      Model rp = build_model(rc);
      deserialize_checkpoint(weights, rp);
      c.require(rp.random_padding_sites() == k, to_string(arch) + " K=" + std::to_string(k) +
                                                    ": wrong number of random sites");
      const Tensor yk = rp.forward(x, eval);
      const bool same = yk.shape() == y0.shape() &&
                        std::memcmp(yk.data().data(), y0.data().data(), y0.numel() * sizeof(float)) == 0;
      c.require(same, to_string(arch) + " K=" + std::to_string(k) + ": eval output differs");
      ++compared;
    }
  }
  return finish(c, std::to_string(compared) +
                       " (architecture, K) variants bit-identical to K=0 in eval mode");
}

RunConfig desk_config(DatasetKind dataset, const fs::path& dir) {
  RunConfig cfg;
  cfg.dataset = dataset;
  cfg.data_dir = dir;
  cfg.train_subset = 10000;
  cfg.test_subset = 0;
  cfg.lr = 0.01f;
  cfg.seeds = 3;
  return cfg;
}

Logger console_logger(bool verbose) {
  if (!verbose) return {};
  return [](const std::string& line) { std::cerr << "  " << line << '\n'; };
}

bool has_files(const fs::path& dir) { return fs::is_directory(dir) && !fs::is_empty(dir); }

// 6. Desk-scale: random padding on the first two sites of cnn-lite.
Outcome criterion_6(bool verbose) {
  const fs::path dir = RANDPAD_FASHION_MNIST_DIR;
  if (!has_files(dir)) return {false, "Fashion-MNIST not found at " + dir.string()};
  const auto t0 = Clock::now();
  RunConfig cfg = desk_config(DatasetKind::fashion_mnist, dir);
  cfg.arch = Architecture::cnn_lite;
  cfg.epochs = 15;
  const DataSplits data = load_splits(cfg, cfg.arch);
  const Logger log = console_logger(verbose);
  std::vector<double> base;
  std::vector<double> rp;
  int improved = 0;
  std::string per_seed;
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    const double e0 = run_classifier(cfg, data, cfg.arch, 0, "none", s, log).result.final_test_error;
    const double e2 = run_classifier(cfg, data, cfg.arch, 2, "none", s, log).result.final_test_error;
    base.push_back(e0);
    rp.push_back(e2);
    if (e2 < e0) ++improved;
    per_seed += " seed" + std::to_string(s) + " " + fmt(e0) + "->" + fmt(e2);
  }
  const double m0 = mean_std(base).mean;
  const double m2 = mean_std(rp).mean;
  const double t = seconds_since(t0);
  Checks c;
  c.require(m2 <= m0, "mean RP error above baseline");
  c.require(improved >= 2, "improvement in only " + std::to_string(improved) + " of 3 seeds");
  c.require(t < 1800.0, "runtime " + fmt(t, 0) + " s >= 30 min");
  return finish(c, "cnn-lite FMNIST 10k x15 epochs, mean test error K=0 " + fmt(m0) + " vs K=2 " +
                       fmt(m2) + ", improved in " + std::to_string(improved) + "/3 (" +
                       per_seed.substr(1) + "), " + fmt(t / 60.0, 1) + " min");
}

// 7. Desk-scale probe comparison on vgg-lite encoders.
Outcome criterion_7(bool verbose) {
  const fs::path dir = RANDPAD_CIFAR10_DIR;
  if (!has_files(dir)) return {false, "CIFAR-10 not found at " + dir.string()};
  const auto t0 = Clock::now();
  RunConfig cfg = desk_config(DatasetKind::cifar10, dir);
  cfg.arch = Architecture::vgg_lite;
  cfg.epochs = 10;
  cfg.probe_patterns = {PatternKind::HG, PatternKind::VG};
  cfg.probe_inputs = {ProbeInput::natural};
  const auto rows = run_table1(cfg, console_logger(verbose));
  std::map<std::string, std::vector<double>> spc;
  for (const ProbeResult& r : rows) spc[r.padding].push_back(r.spc);
  const double trad = mean_std(spc["traditional"]).mean;
  const double rand = mean_std(spc["random"]).mean;
  const double raw = mean_std(spc["none"]).mean;
  const double t = seconds_since(t0);
  Checks c;
  c.require(spc["traditional"].size() == 6 && spc["random"].size() == 6 && spc["none"].size() == 6,
            "expected 3 seeds x 2 patterns per encoder");
  c.require(trad - rand >= 0.1, "SPC difference " + fmt(trad - rand) + " < 0.1");
  c.require(trad > raw, "traditional SPC not above the raw-image baseline");
  c.require(t < 2700.0, "runtime " + fmt(t, 0) + " s >= 45 min");
  return finish(c, "natural HG/VG mean SPC traditional " + fmt(trad) + ", random " + fmt(rand) +
                       ", raw-image " + fmt(raw) + ", difference " + fmt(trad - rand) + ", " +
                       fmt(t / 60.0, 1) + " min");
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Relative path -> bytes for every artifact under dir except run.log.
std::map<std::string, std::vector<std::uint8_t>> artifacts(const fs::path& dir) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "run.log") continue;
    out[fs::relative(e.path(), dir).generic_string()] = read_bytes(e.path());
  }
  return out;
}

// 8. Determinism of every command.
Outcome criterion_8(bool verbose) {
  const fs::path fm = RANDPAD_FASHION_MNIST_DIR;
  const fs::path cf = RANDPAD_CIFAR10_DIR;
  if (!has_files(fm) || !has_files(cf)) return {false, "datasets not found"};
  const fs::path work = fs::temp_directory_path() / "randpad-acceptance-8";
  fs::remove_all(work);
  fs::create_directories(work);

  auto write_config = [&](const std::string& name, const std::string& text) {
    const fs::path p = work / name;
    write_file(p, text);
    return p.string();
  };
  const std::string small_fm = "dataset = fashion-mnist\ndata_dir = " + fm.string() +
                               "\ntrain_subset = 512\ntest_subset = 256\nlr = 0.01\n";
  auto cifar = [&](int train_subset) {
    return "dataset = cifar10\ndata_dir = " + cf.string() +
           "\ntrain_subset = " + std::to_string(train_subset) +
           "\ntest_subset = 160\nlr = 0.01\n"
           "probe_train_images = 48\nprobe_test_images = 16\n"
           "probe_epochs = 2\nprobe_patterns = HG,G\n"
           "probe_inputs = natural,noise\n";
  };
  const std::string small_cf = cifar(256);
  const std::string train_cfg = write_config(
      "train.txt", small_fm + "arch = cnn-lite\nrp_layers = 2\nepochs = 2\naugment = rc,rr,rf,re\n");
  const std::string encoder_cfg =
      write_config("encoder.txt", small_cf + "arch = vgg-lite\nrp_layers = 6\nepochs = 1\n");

  struct Job {
    std::string name;
    std::vector<std::string> args;
  };
  std::vector<Job> jobs{
      {"train", {"train", "--config", train_cfg, "--seed", "3"}},
      {"encoder", {"train", "--config", encoder_cfg, "--seed", "4"}},
  };
  std::ostringstream sink;
  std::ostream& console = verbose ? std::cerr : sink;
  Checks c;
  std::size_t files = 0;
  std::map<std::string, int> kinds;

  auto run = [&](const Job& job, const fs::path& out) {
    std::vector<std::string> argv{"randpad"};
    argv.insert(argv.end(), job.args.begin(), job.args.end());
    argv.push_back("--out");
    argv.push_back(out.string());
    std::vector<const char*> ptrs;
    for (const auto& a : argv) ptrs.push_back(a.c_str());
    std::ostringstream err;
    const int code = cli_main(static_cast<int>(ptrs.size()), ptrs.data(), console, err);
    c.require(code == 0, job.name + " exited " + std::to_string(code) + ": " + err.str());
    return code == 0;
  };
  auto twice = [&](const Job& job) {
    const fs::path a = work / (job.name + "-a");
    const fs::path b = work / (job.name + "-b");
    if (!run(job, a) || !run(job, b)) return;
    const auto fa = artifacts(a);
    const auto fb = artifacts(b);
    c.require(fa.size() == fb.size(), job.name + ": different artifact sets");
    for (const auto& [name, bytes] : fa) {
      const auto it = fb.find(name);
      c.require(it != fb.end() && it->second == bytes, job.name + ": " + name + " differs");
      ++files;
      ++kinds[fs::path(name).extension().string()];
    }
  };

  for (const Job& job : jobs) twice(job);
  const std::string model = (work / "train-a" / "model.rplb").string();
  const std::string encoder = (work / "encoder-a" / "model.rplb").string();
  const std::string eval_cfg = write_config(
      "eval.txt", small_fm + "arch = cnn-lite\nrp_layers = 2\ncheckpoint = " + model + "\n");
  const std::string probe_cfg = write_config(
      "probe.txt", small_cf + "arch = vgg-lite\nencoders = rp:random:" + encoder + "\n");
  const std::string t1_cfg = write_config(
      "table1.txt", small_cf + "preset = table1-desk\nepochs = 1\nseeds = 1\n");
  const std::string t2_cfg = write_config(
      "table2.txt", small_fm + "preset = table2-desk\narchs = cnn-lite\nepochs = 1\nseeds = 1\n");
  const std::string t3_cfg = write_config(
      "table3.txt", cifar(64) + "preset = table3-desk\nepochs = 1\nseeds = 1\n");
  for (const Job& job : std::vector<Job>{
           {"eval", {"eval", "--config", eval_cfg, "--seed", "3"}},
           {"probe", {"probe", "--config", probe_cfg, "--seed", "5"}},
           {"table1", {"experiment", "--config", t1_cfg, "--seed", "6"}},
           {"table2", {"experiment", "--config", t2_cfg, "--seed", "7"}},
           {"table3", {"experiment", "--config", t3_cfg, "--seed", "8"}}}) {
    twice(job);
  }
  for (const char* ext : {".csv", ".json", ".pgm", ".rplb"}) {
    c.require(kinds[ext] > 0, std::string("no ") + ext + " artifacts compared");
  }
  std::string kind_list;
  for (const auto& [ext, n] : kinds) kind_list += " " + std::to_string(n) + ext;
  if (c.ok()) fs::remove_all(work);
  return finish(c, "train, eval, probe and three experiment presets each run twice: " +
                       std::to_string(files) + " artifacts byte-identical (" + kind_list.substr(1) +
                       ")");
}

std::string format_error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.what();
  } catch (const std::exception& e) {
    return std::string("unexpected exception: ") + e.what();
  }
  return "no error";
}

// 9. Loader bit-exactness through real files.
Outcome criterion_9() {
  Checks c;
  const fs::path work = fs::temp_directory_path() / "randpad-acceptance-9";
  fs::remove_all(work);
  fs::create_directories(work);
  auto put = [&](const std::string& name, const std::vector<std::uint8_t>& bytes) {
    const fs::path p = work / name;
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return p;
  };

  const auto pixels = rp_test::two_image_pixels();
  const auto img = rp_test::idx_images(2, 2, 3, pixels);
  const auto lbl = rp_test::idx_labels({7, 2});
  const auto ds = load_idx(put("img.idx", img), put("lbl.idx", lbl));
  c.require(ds.images.shape() == Shape{2, 1, 2, 3}, "IDX shape");
  c.require(ds.labels == std::vector<std::uint32_t>{7, 2}, "IDX labels");
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    c.require(ds.images.data()[i] == static_cast<float>(pixels[i]) / 255.0f,
              "IDX pixel " + std::to_string(i));
  }

  std::vector<std::uint8_t> cifar;
  for (std::uint8_t r = 0; r < 3; ++r) {
    const auto rec = rp_test::cifar_record({static_cast<std::uint8_t>(r + 4)}, r);
    cifar.insert(cifar.end(), rec.begin(), rec.end());
  }
  const auto cds = load_cifar_file(put("batch.bin", cifar), CifarVariant::c10);
  c.require(cds.images.shape() == Shape{3, 3, 32, 32}, "CIFAR shape");
  c.require(cds.labels == std::vector<std::uint32_t>{4, 5, 6}, "CIFAR labels");
  for (std::size_t n = 0; n < 3; ++n) {
    c.require(cds.images.at(n, 0, 0, 0) == 1.0f && cds.images.at(n, 1, 0, 0) == 0.0f &&
                  cds.images.at(n, 2, 0, 0) == 0.0f,
              "CIFAR pixel (0,0) of record " + std::to_string(n));
    for (std::size_t ch = 0; ch < 3; ++ch) {
      for (std::size_t i = 1; i < 1024; ++i) {
        const float expect = static_cast<float>((n + 7 * ch + i) % 256) / 255.0f;
        if (cds.images.at(n, ch, i / 32, i % 32) != expect) {
          c.require(false, "CIFAR pixel mismatch");
        }
      }
    }
  }
  const auto c100 = parse_cifar(rp_test::cifar_record({3, 42}, 0), CifarVariant::c100);
  c.require(c100.labels == std::vector<std::uint32_t>{42}, "CIFAR-100 fine label");

  auto expect_error = [&](const std::string& what, const std::function<void()>& fn,
                          const std::string& needle) {
    const std::string msg = format_error_of(fn);
    c.require(msg.find(needle) != std::string::npos, what + ": got '" + msg + "'");
  };
  auto bad = img;
  bad[3] = 0x01;
  const fs::path bad_img = put("bad.idx", bad);
  const fs::path good_lbl = work / "lbl.idx";
  expect_error("IDX bad magic", [&] { load_idx(bad_img, good_lbl); }, "bad magic");
  auto trunc = img;
  trunc.pop_back();
  const fs::path trunc_img = put("trunc.idx", trunc);
  expect_error("IDX truncation", [&] { load_idx(trunc_img, good_lbl); }, "truncated");
  auto bad_lbl = lbl;
  bad_lbl[2] = 0x09;
  const fs::path bad_lbl_path = put("badlbl.idx", bad_lbl);
  expect_error("IDX label magic", [&] { load_idx(work / "img.idx", bad_lbl_path); }, "bad magic");
  auto cut = cifar;
  cut.resize(cut.size() - 100);
  const fs::path cut_path = put("cut.bin", cut);
  expect_error("CIFAR truncation", [&] { load_cifar_file(cut_path, CifarVariant::c10); }, "file size");
  const fs::path bad_label = put("badlabel.bin", rp_test::cifar_record({10}, 0));
  expect_error("CIFAR label range", [&] { load_cifar_file(bad_label, CifarVariant::c10); }, "label");
  fs::remove_all(work);
  return finish(c, "IDX and CIFAR fixtures round-trip bit-exactly; bad magic, truncation and "
                   "label-range cases raise format errors");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> selected;
  bool verbose = false;
  app.add_option("--criterion", selected, "criterion numbers to run (default: all)")
      ->check(CLI::Range(1, 9));
  app.add_flag("--verbose", verbose, "echo training progress to stderr");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::map<int, std::function<Outcome()>> criteria{
      {1, criterion_1},
      {2, criterion_2},
      {3, criterion_3},
      {4, criterion_4},
      {5, criterion_5},
      {6, [&] { return criterion_6(verbose); }},
      {7, [&] { return criterion_7(verbose); }},
      {8, [&] { return criterion_8(verbose); }},
      {9, criterion_9},
  };
  bool all = true;
  for (int id : selected) {
    Outcome o;
    try {
      o = criteria.at(id)();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
