#include "doe/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "doe/errors.hpp"
#include "doe/power_flow.hpp"

namespace doe {

namespace {

// Uniform doubles straight off the top 53 bits, so results never depend on
// the standard library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }
  int uniform_int(int count) {  // 0..count-1
    return std::min(count - 1, static_cast<int>(uniform() * count));
  }

 private:
  std::mt19937_64 gen_;
};

void check_spec(const FeederSpec& s) {
  if (s.node_count < 1) throw ValidationError("feeder spec: node_count must be >= 1");
  if (!(s.r_min_ohm > 0) || s.r_max_ohm < s.r_min_ohm) {
    throw ValidationError("feeder spec: need 0 < r_min_ohm <= r_max_ohm");
  }
  if (s.load_p_min_kw < 0 || s.load_p_max_kw < s.load_p_min_kw) {
    throw ValidationError("feeder spec: need 0 <= load_p_min_kw <= load_p_max_kw");
  }
  if (s.branching < 1.0) throw ValidationError("feeder spec: branching must be >= 1");
  if (s.base_voltage_kv <= 0) throw ValidationError("feeder spec: base voltage must be positive");
  if (!(s.v_min_pu < s.slack_voltage_pu && s.slack_voltage_pu < s.v_max_pu)) {
    throw ValidationError("feeder spec: need v_min_pu < slack_voltage_pu < v_max_pu");
  }
  if (s.fixed_transformer_kva == 0.0 && s.transformer_margin <= 1.0) {
    throw ValidationError("feeder spec: transformer_margin must exceed 1");
  }
  if (s.voltage_band_use <= 0 || s.voltage_band_use >= 1) {
    throw ValidationError("feeder spec: voltage_band_use must lie in (0, 1)");
  }
}

}  // namespace

Feeder generate_feeder(const FeederSpec& spec) {
  check_spec(spec);
  Rng rng(spec.seed);
  const int n = spec.node_count;

  // Parents. Chains need no randomness; trees attach each new node to a
  // uniformly chosen open slot, where every node offers 1..2*branching-1
  // slots so the expected fan-out matches `branching`.
  std::vector<int> parent(n + 1, 0);
  if (spec.topology == TopologyKind::Tree) {
    const int slot_range = std::max(1, static_cast<int>(std::llround(2.0 * spec.branching - 1.0)));
    std::vector<int> open;
    std::vector<int> slots(n + 1, 0);
    slots[1] = 1 + rng.uniform_int(slot_range);
    open.push_back(1);
    for (int i = 2; i <= n; ++i) {
      if (open.empty()) {
        parent[i] = i - 1;  // every slot spent: degenerate to a chain tail
      } else {
        const int pick = rng.uniform_int(static_cast<int>(open.size()));
        parent[i] = open[pick];
        if (--slots[open[pick]] == 0) open.erase(open.begin() + pick);
      }
      slots[i] = 1 + rng.uniform_int(slot_range);
      open.push_back(i);
    }
  } else {
    for (int i = 1; i <= n; ++i) parent[i] = i - 1;
  }

  Feeder f;
  f.node_count = n;
  f.base_voltage = spec.base_voltage_kv * 1e3;
  f.slack_voltage = spec.slack_voltage_pu * f.base_voltage;
  f.voltage_min = spec.v_min_pu * f.base_voltage;
  f.voltage_max = spec.v_max_pu * f.base_voltage;
  f.lines.reserve(n);
  for (int i = 1; i <= n; ++i) {
    const double r = rng.uniform(spec.r_min_ohm, spec.r_max_ohm);
    f.lines.push_back({parent[i], i, r, r * spec.x_over_r});
  }
  f.base_load_p = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) f.base_load_p[i] = rng.uniform(spec.load_p_min_kw, spec.load_p_max_kw) * 1e3;
  f.base_load_q = f.base_load_p * spec.q_over_p;
  f.envelope_lower = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  f.envelope_upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  f.node_labels.resize(n);
  for (int i = 0; i < n; ++i) f.node_labels[i] = i + 1;
  f.transformer_rating = 1.0;  // placeholder until loads are final

  // Keep the base case inside the voltage band with room to allocate: shrink
  // loads until their linear drop uses at most the configured share.
  const Topology topo(f);
  const Eigen::VectorXd u = solve_linear(topo, f, Eigen::VectorXd::Zero(n)).u;
  const double worst_drop = f.u0() - u.minCoeff();
  const double budget = spec.voltage_band_use * (f.u0() - f.u_min());
  if (worst_drop > budget) {
    const double scale = budget / worst_drop;
    f.base_load_p *= scale;
    f.base_load_q *= scale;
  }

  const double s_base = std::hypot(f.base_load_p.sum(), f.base_load_q.sum());
  if (spec.fixed_transformer_kva > 0.0) {
    f.transformer_rating = spec.fixed_transformer_kva * 1e3;
    if (f.transformer_rating < s_base) {
      throw ValidationError("feeder spec: fixed transformer rating is below the base apparent load");
    }
  } else {
    f.transformer_rating = spec.transformer_margin * s_base;
  }
  return f;
}

namespace {

void bench_feeder(BenchReport& report, const Feeder& f, const std::string& id,
                  TopologyKind kind, const std::vector<std::string>& engines, int reps) {
  using clock = std::chrono::steady_clock;
  for (const auto& engine : engines) {
    for (DoeCase c : {DoeCase::Import, DoeCase::Export}) {
      BenchCell cell;
      cell.feeder_id = id;
      cell.n_nodes = f.node_count;
      cell.topology = kind;
      cell.engine = engine;
      cell.doe_case = c;
      std::vector<double> times;
      times.reserve(reps);
      for (int rep = 0; rep < reps; ++rep) {
        const auto t0 = clock::now();
        try {
          const DoeResult res = run_engine(f, engine, c);
          cell.combined_kw = res.combined_kw();
          cell.status = "ok";
        } catch (const PreViolationError&) {
          cell.status = "pre-violation";
        } catch (const SolverFailure&) {
          cell.status = "solver-failure";
        } catch (const ValidationError&) {
          cell.status = "validation-error";
        }
        times.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());
      }
      std::sort(times.begin(), times.end());
      cell.time_ms = times[(times.size() - 1) / 2];
      report.cells.push_back(std::move(cell));
    }
  }
}

}  // namespace

BenchReport run_benchmark(const std::vector<FeederSpec>& specs,
                          const std::vector<std::string>& engines, int repetitions) {
  BenchReport report;
  const int reps = std::max(1, repetitions);
  for (const auto& spec : specs) {
    const Feeder f = generate_feeder(spec);
    char id[64];
    std::snprintf(id, sizeof id, "%s-n%d-s%llu", to_string(spec.topology), spec.node_count,
                  static_cast<unsigned long long>(spec.seed));
    bench_feeder(report, f, id, spec.topology, engines, reps);
  }
  return report;
}

BenchReport run_benchmark(const Feeder& f, const std::string& feeder_id,
                          const std::vector<std::string>& engines, int repetitions) {
  const TopologyReport rep = validate_radial(f);
  const TopologyKind kind = rep.lateral_count == 0 && rep.slack_adjacent_count <= 1
                                ? TopologyKind::Chain
                                : TopologyKind::Tree;
  BenchReport report;
  bench_feeder(report, f, feeder_id, kind, engines, std::max(1, repetitions));
  return report;
}

std::string bench_to_csv(const BenchReport& report) {
  std::string out = "feeder_id,n_nodes,topology,engine,case,time_ms,combined_kw,status\n";
  char line[256];
  for (const auto& c : report.cells) {
    std::snprintf(line, sizeof line, "%s,%d,%s,%s,%s,%.3f,%.1f,%s\n", c.feeder_id.c_str(),
                  c.n_nodes, to_string(c.topology), c.engine.c_str(), to_string(c.doe_case),
                  c.time_ms, c.combined_kw, c.status.c_str());
    out += line;
  }
  return out;
}

}  // namespace doe
