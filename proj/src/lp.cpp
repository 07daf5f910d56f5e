#include "doe/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "doe/errors.hpp"
#include "doe/power_flow.hpp"
#include "doe/sensitivity.hpp"

namespace doe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState { Basic, AtLower, AtUpper, Free };

// Bounded-variable revised simplex over an explicit basis inverse. Columns
// are the structural variables, then one slack per row, then any phase-1
// artificials. Bland's rule everywhere, so the walk cannot cycle.
class Simplex {
 public:
  explicit Simplex(const LpProblem& p) : m_(p.rows()), n_(p.cols()) {
    an_ = p.row_coeffs;
    b_ = p.row_rhs;
    for (int i = 0; i < m_; ++i) {
      if (p.row_sense[i] == RowSense::Ge) {
        an_.row(i) = -an_.row(i);
        b_[i] = -b_[i];
      }
    }
    lo_ = p.lower;
    up_ = p.upper;
    cost_ = p.objective;
  }

  LpSolution run() {
    init_columns();
    LpSolution sol;
    if (n_art_ > 0 && !phase1(sol)) {
      finish(sol);
      return sol;
    }
    phase_ = 2;
    cols_cost_.setZero();
    cols_cost_.head(n_) = cost_;
    // Artificials served their purpose; pin them so they cannot re-enter.
    for (int j = n_ + m_; j < total_; ++j) cols_up_[j] = 0.0;
    sol.status = iterate();
    finish(sol);
    return sol;
  }

 private:
  void init_columns() {
    n_art_ = 0;
    // Slack start: structural variables sit at their finite bound nearest
    // zero, rows whose slack would start negative get an artificial.
    state_.assign(n_ + m_, VarState::AtLower);
    for (int j = 0; j < n_; ++j) {
      const bool lo_fin = std::isfinite(lo_[j]);
      const bool up_fin = std::isfinite(up_[j]);
      if (!lo_fin && !up_fin) state_[j] = VarState::Free;
      else if (!lo_fin) state_[j] = VarState::AtUpper;
      else if (!up_fin) state_[j] = VarState::AtLower;
      else state_[j] = std::abs(lo_[j]) <= std::abs(up_[j]) ? VarState::AtLower : VarState::AtUpper;
    }

    Eigen::VectorXd s0 = b_;
    for (int j = 0; j < n_; ++j) {
      double v = 0.0;
      if (state_[j] == VarState::AtLower) v = lo_[j];
      else if (state_[j] == VarState::AtUpper) v = up_[j];
      if (v != 0.0) s0 -= an_.col(j) * v;
    }

    std::vector<int> art_rows;
    for (int i = 0; i < m_; ++i) {
      if (s0[i] < -1e-9 * (1.0 + std::abs(b_[i]))) art_rows.push_back(i);
    }
    n_art_ = static_cast<int>(art_rows.size());
    total_ = n_ + m_ + n_art_;

    cols_lo_ = Eigen::VectorXd::Zero(total_);
    cols_up_ = Eigen::VectorXd::Constant(total_, kInf);
    cols_lo_.head(n_) = lo_;
    cols_up_.head(n_) = up_;
    cols_cost_ = Eigen::VectorXd::Zero(total_);

    art_row_.assign(total_, -1);
    state_.resize(total_, VarState::AtLower);
    basis_.assign(m_, -1);
    for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;  // slacks
    for (int k = 0; k < n_art_; ++k) {
      const int j = n_ + m_ + k;
      art_row_[j] = art_rows[k];
      basis_[art_rows[k]] = j;
      state_[n_ + art_rows[k]] = VarState::AtLower;  // displaced slack
      cols_cost_[j] = -1.0;
    }
    for (int i = 0; i < m_; ++i) state_[basis_[i]] = VarState::Basic;

    binv_ = Eigen::MatrixXd::Identity(m_, m_);
    for (int k = 0; k < n_art_; ++k) binv_(art_rows[k], art_rows[k]) = -1.0;
    pivots_since_refactor_ = 0;
  }

  double nonbasic_value(int j) const {
    switch (state_[j]) {
      case VarState::AtLower: return cols_lo_[j];
      case VarState::AtUpper: return cols_up_[j];
      default: return 0.0;
    }
  }

  Eigen::VectorXd column(int j) const {
    if (j < n_) return an_.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
    if (j < n_ + m_) e[j - n_] = 1.0;
    else e[art_row_[j]] = -1.0;
    return e;
  }

  Eigen::VectorXd basic_values() const {
    Eigen::VectorXd rhs = b_;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic) continue;
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      if (j < n_) rhs -= an_.col(j) * v;
      else if (j < n_ + m_) rhs[j - n_] -= v;
      else rhs[art_row_[j]] += v;
    }
    return binv_ * rhs;
  }

  Eigen::VectorXd duals() const {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cols_cost_[basis_[i]];
    return binv_.transpose() * cb;
  }

  Eigen::VectorXd reduced_costs(const Eigen::VectorXd& y) const {
    Eigen::VectorXd d(total_);
    d.head(n_) = cost_head() - an_.transpose() * y;
    for (int i = 0; i < m_; ++i) d[n_ + i] = cols_cost_[n_ + i] - y[i];
    for (int j = n_ + m_; j < total_; ++j) d[j] = cols_cost_[j] + y[art_row_[j]];
    return d;
  }

  Eigen::VectorXd cost_head() const { return cols_cost_.head(n_); }

  LpStatus iterate() {
    const double tol_d = 1e-9 * (1.0 + cols_cost_.cwiseAbs().maxCoeff());
    const double tol_piv = 1e-10;
    const int iter_cap = 10000 + 50 * total_;

    for (;;) {
      if (++iters_ > iter_cap) return LpStatus::IterationLimit;
      Eigen::VectorXd xb = basic_values();
      const Eigen::VectorXd y = duals();
      const Eigen::VectorXd d = reduced_costs(y);

      // Bland: lowest-index improving column enters.
      int enter = -1;
      int dir = 0;
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == VarState::Basic) continue;
        if (phase_ == 2 && j >= n_ + m_) continue;
        if ((state_[j] == VarState::AtLower || state_[j] == VarState::Free) && d[j] > tol_d) {
          enter = j;
          dir = 1;
          break;
        }
        if ((state_[j] == VarState::AtUpper || state_[j] == VarState::Free) && d[j] < -tol_d) {
          enter = j;
          dir = -1;
          break;
        }
      }
      if (enter < 0) {
        last_d_ = d;
        return LpStatus::Optimal;
      }

      const Eigen::VectorXd w = binv_ * column(enter);

      double t_best = kInf;
      int leave_row = -1;
      bool leave_at_lower = true;
      const double span = cols_up_[enter] - cols_lo_[enter];
      if (std::isfinite(span)) t_best = span;  // bound-to-bound flip
      for (int i = 0; i < m_; ++i) {
        const double delta = dir * w[i];
        const int bj = basis_[i];
        double t;
        bool to_lower;
        if (delta > tol_piv) {
          if (!std::isfinite(cols_lo_[bj])) continue;
          t = (xb[i] - cols_lo_[bj]) / delta;
          to_lower = true;
        } else if (delta < -tol_piv) {
          if (!std::isfinite(cols_up_[bj])) continue;
          t = (xb[i] - cols_up_[bj]) / delta;
          to_lower = false;
        } else {
          continue;
        }
        t = std::max(t, 0.0);
        // Bland again: strict improvement, ties to the smallest variable id.
        if (t < t_best - 1e-12 || (t < t_best + 1e-12 && leave_row >= 0 && bj < basis_[leave_row])) {
          t_best = t;
          leave_row = i;
          leave_at_lower = to_lower;
        }
      }

      if (!std::isfinite(t_best)) return LpStatus::Unbounded;

      if (leave_row < 0) {
        // The entering variable runs bound to bound.
        state_[enter] = state_[enter] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        continue;
      }

      const int leave = basis_[leave_row];
      state_[leave] = leave_at_lower ? VarState::AtLower : VarState::AtUpper;
      state_[enter] = VarState::Basic;
      basis_[leave_row] = enter;

      const double wr = w[leave_row];
      binv_.row(leave_row) /= wr;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_row) continue;
        binv_.row(i) -= w[i] * binv_.row(leave_row);
      }
      if (++pivots_since_refactor_ >= 200) refactor();
    }
  }

  void refactor() {
    Eigen::MatrixXd bmat(m_, m_);
    for (int i = 0; i < m_; ++i) bmat.col(i) = column(basis_[i]);
    binv_ = bmat.partialPivLu().inverse();
    pivots_since_refactor_ = 0;
  }

  // Phase 1 drives the artificials to zero. Returns false when the problem
  // is infeasible (some artificial stuck positive). init_columns already set
  // the phase-1 costs: zero everywhere, -1 on the artificials.
  bool phase1(LpSolution& sol) {
    phase_ = 1;
    const LpStatus st = iterate();
    if (st != LpStatus::Optimal) {
      sol.status = st;
      return false;
    }
    const Eigen::VectorXd xb = basic_values();
    double art_sum = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= n_ + m_) art_sum += std::abs(xb[i]);
    }
    if (art_sum > 1e-7 * (1.0 + b_.cwiseAbs().maxCoeff())) {
      sol.status = LpStatus::Infeasible;
      return false;
    }
    return true;
  }

  void finish(LpSolution& sol) {
    const Eigen::VectorXd xb = basic_values();
    Eigen::VectorXd x(total_);
    for (int j = 0; j < total_; ++j) x[j] = state_[j] == VarState::Basic ? 0.0 : nonbasic_value(j);
    for (int i = 0; i < m_; ++i) x[basis_[i]] = xb[i];

    sol.x = x.head(n_);
    sol.objective = cost_.dot(sol.x);
    sol.iterations = iters_;
    sol.row_active.assign(m_, false);
    sol.at_lower.assign(n_, false);
    sol.at_upper.assign(n_, false);
    for (int i = 0; i < m_; ++i) {
      const double slack = x[n_ + i];
      sol.row_active[i] = std::abs(slack) <= 1e-7 * (1.0 + std::abs(b_[i]));
    }
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j]) && std::abs(sol.x[j] - lo_[j]) <= 1e-7 * (1.0 + std::abs(lo_[j])))
        sol.at_lower[j] = true;
      if (std::isfinite(up_[j]) && std::abs(sol.x[j] - up_[j]) <= 1e-7 * (1.0 + std::abs(up_[j])))
        sol.at_upper[j] = true;
    }
    if (sol.status == LpStatus::Optimal && last_d_.size() == total_) {
      const double tol_d = 1e-9 * (1.0 + cols_cost_.cwiseAbs().maxCoeff());
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == VarState::Basic || j >= n_ + m_) continue;
        if (std::abs(last_d_[j]) <= tol_d) {
          sol.degenerate = true;
          break;
        }
      }
    }
  }

  int m_ = 0, n_ = 0, n_art_ = 0, total_ = 0;
  int phase_ = 1;
  int iters_ = 0;
  int pivots_since_refactor_ = 0;
  Eigen::MatrixXd an_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd b_, cost_, lo_, up_;
  Eigen::VectorXd cols_lo_, cols_up_, cols_cost_;
  Eigen::VectorXd last_d_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  std::vector<int> art_row_;
};

}  // namespace

LpSolution solve_simplex(const LpProblem& problem) {
  if (problem.rows() == 0) {
    // Degenerate input: clamp each variable to its best bound.
    LpSolution sol;
    const int n = problem.cols();
    sol.x = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      const double c = problem.objective[j];
      const double best = c >= 0 ? problem.upper[j] : problem.lower[j];
      if (!std::isfinite(best) && c != 0) {
        sol.status = LpStatus::Unbounded;
        return sol;
      }
      sol.x[j] = std::isfinite(best) ? best : 0.0;
    }
    sol.status = LpStatus::Optimal;
    sol.objective = problem.objective.dot(sol.x);
    sol.at_lower.assign(n, false);
    sol.at_upper.assign(n, false);
    return sol;
  }
  Simplex s(problem);
  return s.run();
}

LpProblem assemble_lp(const Feeder& f, DoeCase c) {
  const Topology topo(f);
  const SensitivityMatrices sens = sensitivity_matrices(topo);
  const SpareCapacity sp = spare_capacity(topo, f);
  const int n = topo.n;
  const bool import = c == DoeCase::Import;

  LpProblem p;
  p.objective = Eigen::VectorXd::Constant(n, import ? 1.0 : -1.0);
  p.row_coeffs = Eigen::MatrixXd(n + 1, n);
  p.row_coeffs.row(0) = Eigen::RowVectorXd::Ones(n);
  p.row_coeffs.bottomRows(n) = sens.R;
  p.row_rhs = Eigen::VectorXd(n + 1);
  p.row_sense.assign(n + 1, import ? RowSense::Le : RowSense::Ge);
  p.row_tags.resize(n + 1);
  p.row_tags[0] = "thermal";
  for (int m = 1; m <= n; ++m) p.row_tags[m] = "voltage@" + std::to_string(m);
  if (import) {
    p.row_rhs[0] = sp.p_hat;
    p.row_rhs.tail(n) = sp.e_hat;
    p.lower = Eigen::VectorXd::Zero(n);
    p.upper = f.envelope_upper;
  } else {
    p.row_rhs[0] = sp.p_breve;
    p.row_rhs.tail(n) = sp.e_breve;
    p.lower = f.envelope_lower;
    p.upper = Eigen::VectorXd::Zero(n);
  }
  return p;
}

DoeResult run_lp_doe(const Feeder& f, DoeCase c) {
  const Topology topo(f);
  const LpProblem prob = assemble_lp(f, c);
  const LpSolution sol = solve_simplex(prob);
  if (sol.status == LpStatus::Unbounded) {
    throw SolverFailure("lp envelope allocation is unbounded; check envelope bounds");
  }
  if (sol.status != LpStatus::Optimal) {
    throw SolverFailure("lp solve failed: " +
                        std::string(sol.status == LpStatus::Infeasible ? "infeasible"
                                                                       : "iteration limit"));
  }

  DoeResult res;
  res.engine = "lp";
  res.doe_case = c;
  res.envelopes = sol.x;
  res.combined = sol.x.sum();
  res.degenerate = sol.degenerate;
  res.iterations = sol.iterations;

  for (int i = 0; i < prob.rows(); ++i) {
    if (!sol.row_active[i]) continue;
    res.binding.push_back(i == 0 ? BindingConstraint{BindingKind::Thermal, 0}
                                 : BindingConstraint{BindingKind::Voltage, i});
  }
  const bool import = c == DoeCase::Import;
  for (int j = 0; j < prob.cols(); ++j) {
    const double bound = import ? prob.upper[j] : prob.lower[j];
    const bool at_env = import ? sol.at_upper[j] : sol.at_lower[j];
    if (at_env && std::isfinite(bound)) {
      res.binding.push_back({BindingKind::EnvelopeBound, j + 1});
    }
  }

  const BranchFlowState lin = solve_linear(topo, f, res.envelopes);
  res.v_min_pu = lin.v_min(f);
  res.v_max_pu = lin.v_max(f);
  res.s01_kva = lin.signed_head_s() / 1e3;
  attach_ac_check(res, topo, f);
  return res;
}

}  // namespace doe
