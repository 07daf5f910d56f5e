#pragma once

#include <Eigen/Dense>

#include "doe/feeder.hpp"

namespace doe {

// Branch-flow solution. Line quantities are indexed by receiving node
// (entry m-1 for the line into node m); line_p/line_q are measured at the
// sending end, so for the lossless linear model they equal the receiving-end
// flows. u holds squared voltage magnitudes.
struct BranchFlowState {
  Eigen::VectorXd line_p;      // W
  Eigen::VectorXd line_q;      // var
  Eigen::VectorXd current_sq;  // A^2, zero in the linear model
  Eigen::VectorXd u;           // V^2, entry m-1 for node m

  double head_p = 0.0;  // W into the feeder, sum over slack-adjacent lines
  double head_q = 0.0;  // var
  double head_s = 0.0;  // VA

  bool converged = true;
  int iterations = 0;

  double v_min(const Feeder& f) const;  // per unit
  double v_max(const Feeder& f) const;
  // Feeder-head apparent power, signed by real-power direction.
  double signed_head_s() const;
};

// Lossless linearization: line flows are plain downstream sums and voltage
// drops lose the current-squared term. p_envelope adds to the base load.
BranchFlowState solve_linear(const Topology& topo, const Feeder& f,
                             const Eigen::VectorXd& p_envelope);
BranchFlowState solve_linear(const Feeder& f, const Eigen::VectorXd& p_envelope);

struct AcOptions {
  double tolerance = 1e-8;  // relative to u0, on the squared-voltage update
  int max_iterations = 100;
};

// Full branch-flow solution by backward/forward sweeps from a flat start.
// Non-convergence is reported through the state, never clamped.
BranchFlowState solve_ac(const Topology& topo, const Feeder& f,
                         const Eigen::VectorXd& p_envelope, const AcOptions& opt = {});
BranchFlowState solve_ac(const Feeder& f, const Eigen::VectorXd& p_envelope,
                         const AcOptions& opt = {});

// Headroom left by the base operating point, the inputs every allocation
// engine starts from. Import quantities are >= 0, export ones <= 0.
struct SpareCapacity {
  double p_bar = 0.0;    // W, real-power transfer limit sqrt(S^2 - Q_base^2)
  double p_base = 0.0;   // W, base real power at the head
  double q_base = 0.0;   // var
  double p_hat = 0.0;    // W, spare import transfer capacity
  double p_breve = 0.0;  // W, spare export transfer capacity (<= 0)

  double e_bar = 0.0;    // V^2, allowed squared-voltage drop below slack
  double e_lower = 0.0;  // V^2, allowed rise (<= 0)
  Eigen::VectorXd e_tilde;  // V^2, base-load deviations per node
  Eigen::VectorXd e_hat;    // V^2, spare drop capacity per node (>= 0)
  Eigen::VectorXd e_breve;  // V^2, spare rise capacity per node (<= 0)
};

// Throws PreViolationError when the base load already breaks a limit.
SpareCapacity spare_capacity(const Topology& topo, const Feeder& f);
SpareCapacity spare_capacity(const Feeder& f);

}  // namespace doe
