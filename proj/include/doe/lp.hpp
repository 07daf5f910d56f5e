#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "doe/doe_result.hpp"
#include "doe/feeder.hpp"

namespace doe {

enum class RowSense { Le, Ge };

// Dense LP: maximize objective . x subject to row constraints and variable
// bounds. Bounds may be infinite on either side.
struct LpProblem {
  Eigen::VectorXd objective;
  Eigen::MatrixXd row_coeffs;
  Eigen::VectorXd row_rhs;
  std::vector<RowSense> row_sense;
  Eigen::VectorXd lower, upper;
  std::vector<std::string> row_tags;

  int rows() const { return static_cast<int>(row_coeffs.rows()); }
  int cols() const { return static_cast<int>(row_coeffs.cols()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  std::vector<bool> row_active;      // slack at zero
  std::vector<bool> at_lower, at_upper;
  // Alternative optimal vertices detectable: some nonbasic variable prices
  // out to a zero reduced cost.
  bool degenerate = false;
  int iterations = 0;
};

// Bounded-variable revised simplex with Bland's rule and a phase-1 pass for
// rows whose slack starts negative. Deterministic for a fixed problem.
LpSolution solve_simplex(const LpProblem& problem);

// Envelope allocation as a transfer-maximizing LP over the linearized model:
// one thermal row plus one voltage row per node, variable bounds from the
// per-node envelope limits.
LpProblem assemble_lp(const Feeder& f, DoeCase c);

DoeResult run_lp_doe(const Feeder& f, DoeCase c);

}  // namespace doe
