#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "doe/doe_result.hpp"
#include "doe/feeder.hpp"

namespace doe {

struct NlpOptions {
  double fd_step = 1.0;         // W, finite-difference probe size
  double step_converged = 1.0;  // W, stop when no component wants to move more
  double feasibility_rel = 1e-6;  // relative limit violation accepted as AC-feasible
  int max_outer = 50;             // linearization rounds per start
};

// One accepted or rejected trust-region step of a linearization run.
struct SlpStep {
  Eigen::VectorXd p;       // W, candidate point
  double combined = 0.0;   // W
  double trust = 0.0;      // W, max trust radius when the step was taken
  double violation = 0.0;  // relative, from the full re-simulation
  bool accepted = false;
};

struct SlpTrace {
  std::string start_name;
  std::vector<SlpStep> steps;
  bool converged = false;
};

// Transfer-maximizing allocation against the full branch-flow model:
// successive linearization by finite-difference probes, a box trust region,
// steps kept only when the re-simulated point stays feasible. Restarted from
// several deterministic seeds (flat zero, a damped copy of the lp result,
// single-node solo points) because the landscape has distinct basins once
// losses matter; the best feasible finisher wins.
DoeResult run_nlp_doe(const Feeder& f, DoeCase c, const NlpOptions& opt = {},
                      std::vector<SlpTrace>* traces = nullptr);

// Independent check for a single node: every other envelope pinned to zero,
// bracket the first constraint crossing by doubling, then bisect.
struct BisectResult {
  double envelope = 0.0;  // W, signed
  bool hit_bound = false;  // stopped by the node's own envelope bound instead
};
BisectResult oracle_bisect(const Feeder& f, int node, DoeCase c, double tol_w = 0.1);

// Exhaustive grid oracle for feeders with at most three customer nodes.
DoeResult oracle_grid(const Feeder& f, DoeCase c, double resolution_w);

}  // namespace doe
