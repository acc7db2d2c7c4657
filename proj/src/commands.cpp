#include "randpad/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "randpad/checkpoint.hpp"
#include "randpad/error.hpp"
#include "randpad/experiments.hpp"
#include "randpad/report.hpp"
#include "randpad/train.hpp"

namespace randpad {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

/// Appends progress lines to run.log and echoes them to the console.
class RunLog {
 public:
  RunLog(const fs::path& path, std::ostream* console) : file_(path), console_(console) {
    if (!file_) throw ConfigError("cannot write " + path.string());
  }

  void operator()(const std::string& line) {
    file_ << line << '\n';
    file_.flush();
    if (console_ != nullptr) *console_ << line << '\n';
  }

  Logger logger() {
    return [this](const std::string& line) { (*this)(line); };
  }

 private:
  std::ofstream file_;
  std::ostream* console_;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Json config_echo(const RunConfig& cfg) {
  Json j = Json::object();
  for (const auto& [key, value] : effective_values(cfg)) j[key] = value;
  return j;
}

Json summary_head(const std::string& command, const RunConfig& cfg) {
  Json j;
  j["command"] = command;
  j["scale"] = "desk-scale";
  j["config"] = config_echo(cfg);
  return j;
}

/// Starts a command: output directory, config echo and run log.
RunLog open_run(const CommandContext& ctx, const std::string& command) {
  prepare_output_dir(ctx.out);
  write_file(ctx.out / "config.txt", to_config_text(ctx.cfg));
  RunLog log(ctx.out / "run.log", ctx.console);
  log(command + " seed=" + std::to_string(ctx.cfg.seed) + " out=" + ctx.out.string());
  return log;
}

void finish_run(const CommandContext& ctx, RunLog& log, const Json& summary,
                const Stopwatch& clock) {
  write_file(ctx.out / "summary.json", summary.dump(2) + "\n");
  // Wall time stays out of the JSON so that re-runs compare byte-identical.
  log("wall_seconds=" + format_fixed(clock.seconds(), 3));
}

std::string metrics_csv(const TrainResult& result) {
  std::string s = "epoch,train_loss,train_error,test_error\n";
  for (const EpochMetrics& m : result.history) {
    s += std::to_string(m.epoch + 1) + "," + format_fixed(m.train_loss) + "," +
         format_fixed(m.train_error) + "," + format_fixed(m.test_error) + "\n";
  }
  return s;
}

Json history_json(const TrainResult& result) {
  Json epochs = Json::array();
  for (const EpochMetrics& m : result.history) {
    epochs.push_back({{"epoch", m.epoch + 1},
                      {"train_loss", m.train_loss},
                      {"train_error", m.train_error},
                      {"test_error", m.test_error}});
  }
  return epochs;
}

Model model_for(const RunConfig& cfg, const DataSplits& data) {
  return build_model(model_config(cfg, cfg.arch, cfg.rp_layers, data.train.class_count,
                                  data.train.images.shape(), cfg.seed));
}

std::string map_name(const ProbeResult& r) {
  return r.encoder_id + "_" + r.pattern + "_" + r.input_kind;
}

Json probe_rows_json(const std::vector<ProbeResult>& rows) {
  Json arr = Json::array();
  for (const ProbeResult& r : rows) {
    arr.push_back({{"encoder_id", r.encoder_id},
                   {"padding", r.padding},
                   {"pattern", r.pattern},
                   {"input_kind", r.input_kind},
                   {"spc", r.spc},
                   {"mae", r.mae},
                   {"seed", r.seed}});
  }
  return arr;
}

std::string probe_csv(const std::vector<ProbeResult>& rows) {
  std::string s = std::string(kProbeCsvHeader) + "\n";
  for (const ProbeResult& r : rows) s += probe_csv_row(r) + "\n";
  return s;
}

void dump_maps(const fs::path& dir, const std::vector<ProbeResult>& rows, bool with_seed) {
  fs::create_directories(dir);
  for (const ProbeResult& r : rows) {
    std::string name = map_name(r);
    if (with_seed) name += "_seed" + std::to_string(r.seed);
    write_pgm(dir / (name + ".pgm"), r.example_map);
  }
}

void run_classifier_preset(const CommandContext& ctx, RunLog& log, Json& summary,
                           const std::vector<ClassifierRun>& runs) {
  std::string cells = "arch,rp_layers,augment,seed,final_test_error\n";
  std::string metrics = "arch,rp_layers,augment,seed,epoch,train_loss,train_error,test_error\n";
  Json cells_json = Json::array();
  // Aggregate per (arch, K, augment) in first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> errors;
  std::map<std::string, const ClassifierRun*> first;
  for (const ClassifierRun& run : runs) {
    const std::string arch = to_string(run.arch);
    const std::string prefix =
        arch + "," + std::to_string(run.rp_layers) + "," + "\"" + run.augment + "\"";
    cells += prefix + "," + std::to_string(run.seed) + "," +
             format_fixed(run.result.final_test_error) + "\n";
    for (const EpochMetrics& m : run.result.history) {
      metrics += prefix + "," + std::to_string(run.seed) + "," + std::to_string(m.epoch + 1) +
                 "," + format_fixed(m.train_loss) + "," + format_fixed(m.train_error) + "," +
                 format_fixed(m.test_error) + "\n";
    }
    cells_json.push_back({{"arch", arch},
                          {"rp_layers", run.rp_layers},
                          {"augment", run.augment},
                          {"seed", run.seed},
                          {"final_test_error", run.result.final_test_error}});
    if (!errors.contains(prefix)) {
      order.push_back(prefix);
      first[prefix] = &run;
    }
    errors[prefix].push_back(run.result.final_test_error);
  }
  std::string agg = "arch,rp_layers,augment,mean_test_error,std_test_error,seeds\n";
  Json agg_json = Json::array();
  for (const std::string& key : order) {
    const MeanStd ms = mean_std(errors[key]);
    const ClassifierRun& run = *first[key];
    agg += key + "," + format_fixed(ms.mean) + "," + format_fixed(ms.stddev) + "," +
           std::to_string(ms.count) + "\n";
    agg_json.push_back({{"arch", to_string(run.arch)},
                        {"rp_layers", run.rp_layers},
                        {"augment", run.augment},
                        {"mean_test_error", ms.mean},
                        {"std_test_error", ms.stddev},
                        {"seeds", ms.count}});
    log("cell " + key + " mean=" + format_fixed(ms.mean) + " std=" + format_fixed(ms.stddev));
  }
  write_file(ctx.out / "cells.csv", cells);
  write_file(ctx.out / "metrics.csv", metrics);
  write_file(ctx.out / "summary.csv", agg);
  summary["cells"] = std::move(cells_json);
  summary["aggregates"] = std::move(agg_json);
}

void run_table1_preset(const CommandContext& ctx, RunLog& log, Json& summary) {
  const fs::path encoder_dir = ctx.out / "encoders";
  fs::create_directories(encoder_dir);
  const std::vector<ProbeResult> rows = run_table1(ctx.cfg, log.logger(), encoder_dir);
  write_file(ctx.out / "probe.csv", probe_csv(rows));
  if (ctx.cfg.dump_maps) dump_maps(ctx.out / "maps", rows, true);

  std::vector<std::string> order;
  std::map<std::string, std::vector<const ProbeResult*>> groups;
  for (const ProbeResult& r : rows) {
    const std::string key = r.encoder_id + "," + r.padding + "," + r.pattern + "," + r.input_kind;
    if (!groups.contains(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::string agg = "encoder_id,padding,pattern,input_kind,mean_spc,std_spc,mean_mae,std_mae,seeds\n";
  Json agg_json = Json::array();
  for (const std::string& key : order) {
    std::vector<double> spc;
    std::vector<double> mae;
    for (const ProbeResult* r : groups[key]) {
      spc.push_back(r->spc);
      mae.push_back(r->mae);
    }
    const MeanStd s = mean_std(spc);
    const MeanStd m = mean_std(mae);
    agg += key + "," + format_fixed(s.mean) + "," + format_fixed(s.stddev) + "," +
           format_fixed(m.mean) + "," + format_fixed(m.stddev) + "," + std::to_string(s.count) +
           "\n";
    const ProbeResult& r = *groups[key].front();
    agg_json.push_back({{"encoder_id", r.encoder_id},
                        {"padding", r.padding},
                        {"pattern", r.pattern},
                        {"input_kind", r.input_kind},
                        {"mean_spc", s.mean},
                        {"std_spc", s.stddev},
                        {"mean_mae", m.mean},
                        {"std_mae", m.stddev},
                        {"seeds", s.count}});
  }
  write_file(ctx.out / "summary.csv", agg);

  // Headline comparison: SPC on natural inputs, gradient patterns HG and VG.
  auto natural_gradient_spc = [&](const std::string& padding) {
    std::vector<double> v;
    for (const ProbeResult& r : rows) {
      if (r.padding == padding && r.input_kind == "natural" &&
          (r.pattern == "HG" || r.pattern == "VG")) {
        v.push_back(r.spc);
      }
    }
    return v;
  };
  const auto trad = natural_gradient_spc("traditional");
  const auto rand = natural_gradient_spc("random");
  const auto base = natural_gradient_spc("none");
  Json cmp;
  if (!trad.empty()) cmp["mean_spc_traditional"] = mean_std(trad).mean;
  if (!rand.empty()) cmp["mean_spc_random"] = mean_std(rand).mean;
  if (!base.empty()) cmp["mean_spc_raw_image"] = mean_std(base).mean;
  if (!trad.empty() && !rand.empty()) {
    cmp["spc_difference"] = mean_std(trad).mean - mean_std(rand).mean;
    log("natural HG/VG mean spc traditional=" + format_fixed(mean_std(trad).mean) +
        " random=" + format_fixed(mean_std(rand).mean) +
        (base.empty() ? "" : " raw-image=" + format_fixed(mean_std(base).mean)));
  }
  summary["natural_gradient_spc"] = std::move(cmp);
  summary["aggregates"] = std::move(agg_json);
  summary["rows"] = probe_rows_json(rows);
}

}  // namespace

void cmd_train(const CommandContext& ctx) {
  const Stopwatch clock;
  const RunConfig& cfg = ctx.cfg;
  const DataSplits data = load_splits(cfg, cfg.arch);
  RunLog log = open_run(ctx, "train");
  Model model;
  const ClassifierRun run =
      run_classifier(cfg, data, cfg.arch, cfg.rp_layers, cfg.augment, cfg.seed, log.logger(), &model);
  save_checkpoint(model, ctx.out / "model.rplb");
  write_file(ctx.out / "model.txt", model.summary());
  write_file(ctx.out / "metrics.csv", metrics_csv(run.result));
  Json summary = summary_head("train", cfg);
  summary["train_samples"] = data.train.size();
  summary["test_samples"] = data.test.size();
  summary["random_padding_sites"] = model.random_padding_sites();
  summary["final_test_error"] = run.result.final_test_error;
  summary["epochs"] = history_json(run.result);
  log("final_test_error=" + format_fixed(run.result.final_test_error));
  finish_run(ctx, log, summary, clock);
}

void cmd_eval(const CommandContext& ctx) {
  const Stopwatch clock;
  const RunConfig& cfg = ctx.cfg;
  if (cfg.checkpoint.empty()) throw ConfigError("key 'checkpoint' is required for eval");
  if (!fs::is_regular_file(cfg.checkpoint)) {
    throw ConfigError("checkpoint not found: " + cfg.checkpoint.string());
  }
  const DataSplits data = load_splits(cfg, cfg.arch);
  Model model = model_for(cfg, data);
  load_checkpoint(cfg.checkpoint, model);
  RunLog log = open_run(ctx, "eval");
  const double error = evaluate_error(model, data.test);
  const std::size_t total = data.test.size();
  const auto wrong = static_cast<std::size_t>(std::llround(error * static_cast<double>(total)));
  Json summary = summary_head("eval", cfg);
  summary["test_error"] = error;
  summary["wrong"] = wrong;
  summary["total"] = total;
  log("test_error=" + format_fixed(error) + " wrong=" + std::to_string(wrong) +
      " total=" + std::to_string(total));
  finish_run(ctx, log, summary, clock);
}

void cmd_probe(const CommandContext& ctx) {
  const Stopwatch clock;
  const RunConfig& cfg = ctx.cfg;
  if (cfg.encoders.empty() && !cfg.probe_baseline) {
    throw ConfigError("key 'encoders' is empty and probe_baseline is off; nothing to probe");
  }
  for (const EncoderSpec& e : cfg.encoders) {
    if (!fs::is_regular_file(e.checkpoint)) {
      throw ConfigError("encoder '" + e.id + "' checkpoint not found: " + e.checkpoint.string());
    }
  }
  const DataSplits data = load_splits(cfg, cfg.arch);
  std::vector<Model> models;
  models.reserve(cfg.encoders.size());
  for (const EncoderSpec& e : cfg.encoders) {
    models.push_back(model_for(cfg, data));
    load_checkpoint(e.checkpoint, models.back());
  }
  RunLog log = open_run(ctx, "probe");
  std::vector<ProbeEncoder> encoders;
  for (std::size_t i = 0; i < cfg.encoders.size(); ++i) {
    encoders.push_back({cfg.encoders[i].id, cfg.encoders[i].padding, &models[i]});
  }
  if (cfg.probe_baseline) encoders.push_back({kBaselineEncoderId, "none", nullptr});
  const std::vector<ProbeResult> rows = probe_grid(cfg, data, encoders, cfg.seed, log.logger());
  write_file(ctx.out / "probe.csv", probe_csv(rows));
  if (cfg.dump_maps) dump_maps(ctx.out / "maps", rows, false);
  Json summary = summary_head("probe", cfg);
  summary["rows"] = probe_rows_json(rows);
  finish_run(ctx, log, summary, clock);
}

void cmd_experiment(const CommandContext& ctx) {
  const Stopwatch clock;
  const RunConfig& cfg = ctx.cfg;
  const std::string& preset = cfg.preset;
  if (preset != "table1-desk" && preset != "table2-desk" && preset != "table3-desk") {
    throw ConfigError("key 'preset' must be table1-desk, table2-desk or table3-desk, got '" +
                      preset + "'");
  }
  if (cfg.data_dir.empty()) throw ConfigError("key 'data_dir' is required");
  RunLog log = open_run(ctx, "experiment " + preset);
  Json summary = summary_head("experiment", cfg);
  summary["preset"] = preset;
  if (preset == "table1-desk") {
    run_table1_preset(ctx, log, summary);
  } else if (preset == "table2-desk") {
    run_classifier_preset(ctx, log, summary, run_table2(cfg, log.logger()));
  } else {
    run_classifier_preset(ctx, log, summary, run_table3(cfg, log.logger()));
  }
  finish_run(ctx, log, summary, clock);
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random padding CNN engine", "randpad"};
  app.require_subcommand(1);
  fs::path config_path;
  std::uint64_t seed = 0;
  fs::path out_dir;
  std::vector<std::string> overrides;
  const std::pair<const char*, const char*> commands[] = {
      {"train", "train a classifier and save its checkpoint"},
      {"eval", "score a checkpoint on the test split"},
      {"probe", "measure position information in trained encoders"},
      {"experiment", "run a desk-scale preset (table1/2/3-desk)"},
  };
  for (const auto& [name, about] : commands) {
    CLI::App* sub = app.add_subcommand(name, about);
    sub->add_option("--config", config_path, "key=value config file")->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--out", out_dir, "output directory (must be empty or absent)");
    sub->add_option("--override", overrides, "key=value, applied after the config file");
  }

  auto fail = [&](const std::string& kind, const std::string& msg, int code) {
    std::string line = msg;
    for (char& c : line) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    err << "error: " << kind << ": " << line << '\n';
    return code;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    CommandContext ctx;
    ctx.cfg = load_config(config_path);
    apply_overrides(ctx.cfg, overrides);
    if (app.get_subcommands().front()->count("--seed") > 0) ctx.cfg.seed = seed;
    ctx.out = out_dir.empty() ? fs::path("runs") / (command + "-seed" + std::to_string(ctx.cfg.seed))
                              : out_dir;
    ctx.console = &out;
    if (command == "train") cmd_train(ctx);
    else if (command == "eval") cmd_eval(ctx);
    else if (command == "probe") cmd_probe(ctx);
    else cmd_experiment(ctx);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const FormatError& e) {
    return fail("format", e.what(), 3);
  } catch (const InvalidArgument& e) {
    return fail("invalid-argument", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}

}  // namespace randpad
