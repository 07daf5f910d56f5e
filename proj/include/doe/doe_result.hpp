#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "doe/feeder.hpp"
#include "doe/power_flow.hpp"

namespace doe {

enum class DoeCase { Import, Export };

inline const char* to_string(DoeCase c) { return c == DoeCase::Import ? "import" : "export"; }

enum class BindingKind { Thermal, Voltage, EnvelopeBound };

// Which limit stopped an allocation. node is 0 for the feeder-head thermal
// limit, otherwise the constrained node.
struct BindingConstraint {
  BindingKind kind = BindingKind::Thermal;
  int node = 0;

  std::string tag() const;
  bool operator==(const BindingConstraint&) const = default;
};

// Envelope allocation produced by one engine for one case. Verification
// voltages and head power come from the engine's own network model (the
// linearization for lace/lp, the full branch-flow solution for nlp); the
// ac_* block re-simulates the allocation with the full model for every
// engine as an informational cross-check.
struct DoeResult {
  std::string engine;
  DoeCase doe_case = DoeCase::Import;

  Eigen::VectorXd envelopes;  // W, signed; entry m-1 for node m
  double combined = 0.0;      // W
  std::vector<BindingConstraint> binding;

  double v_min_pu = 0.0;
  double v_max_pu = 0.0;
  double s01_kva = 0.0;  // signed by feeder-head real-power direction

  double ac_v_min_pu = 0.0;
  double ac_v_max_pu = 0.0;
  double ac_s01_kva = 0.0;
  bool ac_converged = false;

  bool degenerate = false;  // lp only: alternative optimal vertices detectable
  int iterations = 0;
  std::string status = "ok";

  double combined_kw() const { return combined / 1e3; }
};

// Fills the ac_* cross-check block from a full re-simulation.
void attach_ac_check(DoeResult& result, const Topology& topo, const Feeder& f);

// Dispatch by engine name: "lace", "lp" or "nlp".
DoeResult run_engine(const Feeder& f, const std::string& engine, DoeCase c);

}  // namespace doe
