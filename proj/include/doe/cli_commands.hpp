#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "doe/synth.hpp"

namespace doe {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitPreViolation = 2;
inline constexpr int kExitSolverFailure = 3;

struct DoeCmdOptions {
  std::string feeder_path;
  std::string engine = "all";     // lace | lp | nlp | all
  std::string doe_case = "both";  // import | export | both
  std::string format = "table";   // table | json | csv
  std::string output_path;        // empty: stdout
  double tolerance = 1e-6;        // nlp feasibility tolerance
};
int cmd_doe(const DoeCmdOptions& opt, std::ostream& out, std::ostream& err);

struct BatchCmdOptions {
  std::string feeder_path;
  std::string series_path;
  std::string out_dir = "doe-batch";
  std::string engine = "all";
  std::string doe_case = "both";
  double tolerance = 1e-6;
  int jobs = 0;  // 0: one per hardware thread
};
int cmd_batch(const BatchCmdOptions& opt, std::ostream& out, std::ostream& err);

struct GenCmdOptions {
  FeederSpec spec;
  std::string output_path;  // empty: stdout
};
int cmd_gen(const GenCmdOptions& opt, std::ostream& out, std::ostream& err);

struct BenchCmdOptions {
  int nodes_from = 10;
  int nodes_to = 1000;
  int nodes_step = 10;
  std::string topology = "chain";
  std::string engines = "lace,lp";  // comma separated
  int repetitions = 1;
  std::uint64_t seed = 1;
  std::string feeder_path;  // when set, bench this file instead of a sweep
  std::string output_path;
};
int cmd_bench(const BenchCmdOptions& opt, std::ostream& out, std::ostream& err);

int cmd_validate(const std::string& feeder_path, std::ostream& out, std::ostream& err);

}  // namespace doe
