#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "doe/doe_result.hpp"
#include "doe/feeder.hpp"

namespace doe {

enum class TopologyKind { Chain, Tree };

inline const char* to_string(TopologyKind t) {
  return t == TopologyKind::Chain ? "chain" : "tree";
}

// Recipe for a random but reproducible feeder. Ranges follow typical
// European LV practice: short aluminium segments, a few kW per customer at
// 0.95 power factor, transformer sized with margin over the base load.
struct FeederSpec {
  int node_count = 10;
  TopologyKind topology = TopologyKind::Chain;
  double branching = 2.0;  // tree only: mean children per internal node

  double r_min_ohm = 0.02;
  double r_max_ohm = 0.15;
  double x_over_r = 0.5;

  double load_p_min_kw = 1.0;
  double load_p_max_kw = 6.0;
  double q_over_p = 0.3287;  // tan(acos(0.95))

  // Transformer rating: margin times the base apparent load, unless a fixed
  // rating is given.
  double transformer_margin = 1.3;
  double fixed_transformer_kva = 0.0;

  // Loads are scaled down when the base-case linear voltage drop would use
  // more than this share of the drop band, so deep feeders start feasible.
  double voltage_band_use = 0.6;

  double base_voltage_kv = 0.23;
  double slack_voltage_pu = 1.0;
  double v_min_pu = 0.9;
  double v_max_pu = 1.1;

  std::uint64_t seed = 1;
};

// Deterministic for a fixed spec. Draw order: tree attachment choices (tree
// topology only), then one resistance per line, then one load per node.
Feeder generate_feeder(const FeederSpec& spec);

struct BenchCell {
  std::string feeder_id;
  int n_nodes = 0;
  TopologyKind topology = TopologyKind::Chain;
  std::string engine;
  DoeCase doe_case = DoeCase::Import;
  double time_ms = 0.0;
  double combined_kw = 0.0;
  std::string status;  // "ok" or the failure reason
};

struct BenchReport {
  std::vector<BenchCell> cells;
};

// Runs every engine on every spec for both cases, wall-clock timed. With
// repetitions > 1 the cell keeps the median time.
BenchReport run_benchmark(const std::vector<FeederSpec>& specs,
                          const std::vector<std::string>& engines, int repetitions = 1);

// Same timing loop over an already-built feeder (topology kind detected).
BenchReport run_benchmark(const Feeder& f, const std::string& feeder_id,
                          const std::vector<std::string>& engines, int repetitions = 1);

// feeder_id,n_nodes,topology,engine,case,time_ms,combined_kw,status
std::string bench_to_csv(const BenchReport& report);

}  // namespace doe
