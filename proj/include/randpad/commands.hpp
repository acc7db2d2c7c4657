#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "randpad/config.hpp"

namespace randpad {

/// Where a command writes its artifacts and progress lines.
struct CommandContext {
  RunConfig cfg;
  std::filesystem::path out;
  /// Progress sink in addition to <out>/run.log; may be null.
  std::ostream* console = nullptr;
};

/// Each command writes config.txt, summary.json and run.log into ctx.out,
/// plus its own artifacts:
///   train       model.rplb, model.txt, metrics.csv
///   eval        (summary only)
///   probe       probe.csv, maps/<id>_<pattern>_<input>.pgm
///   experiment  cells.csv, summary.csv, metrics.csv (table2/3-desk) or
///               probe.csv, summary.csv, maps/, encoders/ (table1-desk)
/// Every artifact except run.log is a pure function of (config, seed).
void cmd_train(const CommandContext& ctx);
void cmd_eval(const CommandContext& ctx);
void cmd_probe(const CommandContext& ctx);
void cmd_experiment(const CommandContext& ctx);

/// `randpad <train|eval|probe|experiment> --config FILE [--seed N] [--out DIR]
/// [--override key=value ...]`. Failures print one line
/// "error: <kind>: <message>" to `err` and return a nonzero code:
/// 2 config, 3 format, 4 invalid argument, 1 anything else.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace randpad
