#pragma once

#include <Eigen/Dense>
#include <vector>

#include "doe/doe_result.hpp"
#include "doe/feeder.hpp"
#include "doe/sensitivity.hpp"

namespace doe {

// Largest envelope each node could take alone before some voltage margin in
// e_spare runs out. Import: smallest margin-to-sensitivity ratio over rows
// with positive sensitivity. Export mirrors with the least-negative ratio.
// Nodes outside `active` get NaN. A node whose sensitivity column is all
// zero is electrically at the slack and unbounded by voltage: +/-inf, the
// caller falls back to the thermal and envelope limits.
Eigen::VectorXd solo_envelopes(const SensitivityMatrices& sens,
                               const Eigen::VectorXd& e_spare, DoeCase c,
                               const std::vector<int>& active);

// One greedy round: the chosen node, what it was given and what stopped it.
struct LaceIteration {
  int node = 0;
  Eigen::VectorXd solo;       // W, NaN outside the active set
  double allocated = 0.0;     // W, signed
  BindingConstraint limit;    // which bound capped the allocation
  double thermal_left = 0.0;  // W, spare after this round
  Eigen::VectorXd voltage_left;  // V^2
};

struct LaceTrace {
  std::vector<LaceIteration> rounds;
};

DoeResult run_lace(const Feeder& f, DoeCase c, LaceTrace* trace = nullptr);

}  // namespace doe
