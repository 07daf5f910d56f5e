#pragma once

#include <Eigen/Dense>

#include "doe/feeder.hpp"

namespace doe {

// Voltage sensitivities of the linearized branch-flow model. Entry (m-1, n-1)
// is twice the impedance of the shared slack path of nodes m and n, so the
// squared-voltage deviation at node m is E_m = sum_n R(m,n) p_n (+ X for
// reactive). Symmetric positive semi-definite by construction.
struct SensitivityMatrices {
  Eigen::MatrixXd R;  // ohm
  Eigen::MatrixXd X;  // ohm
};

SensitivityMatrices sensitivity_matrices(const Feeder& feeder);
SensitivityMatrices sensitivity_matrices(const Topology& topo);

}  // namespace doe
