#include "doe/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "doe/errors.hpp"
#include "doe/lace.hpp"
#include "doe/lp.hpp"
#include "doe/power_flow.hpp"
#include "doe/sensitivity.hpp"

namespace doe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Worst limit violation of a solved state, relative to the violated bound.
double rel_violation(const Feeder& f, const BranchFlowState& st) {
  double v = (st.head_s - f.transformer_rating) / f.transformer_rating;
  const double u_lo = f.u_min();
  const double u_hi = f.u_max();
  for (int m = 0; m < st.u.size(); ++m) {
    v = std::max(v, (u_lo - st.u[m]) / u_lo);
    v = std::max(v, (st.u[m] - u_hi) / u_hi);
  }
  return std::max(v, 0.0);
}

bool ac_ok(const Feeder& f, const BranchFlowState& st, double tol) {
  return st.converged && rel_violation(f, st) <= tol;
}

struct Linearization {
  Eigen::VectorXd g_s;  // d|S01| / dp
  Eigen::MatrixXd ju;   // dU / dp, row per node
};

// Central finite differences of the full model around p. Falls back to the
// lossless sensitivities for a column whose probes both diverge.
Linearization linearize(const Topology& topo, const Feeder& f, const Eigen::VectorXd& p,
                        double h, const SensitivityMatrices& sens) {
  const int n = topo.n;
  Linearization lin;
  lin.g_s = Eigen::VectorXd::Zero(n);
  lin.ju = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd probe = p;
  for (int j = 0; j < n; ++j) {
    probe[j] = p[j] + h;
    const BranchFlowState up = solve_ac(topo, f, probe);
    probe[j] = p[j] - h;
    const BranchFlowState dn = solve_ac(topo, f, probe);
    probe[j] = p[j];
    if (up.converged && dn.converged) {
      lin.g_s[j] = (up.head_s - dn.head_s) / (2.0 * h);
      lin.ju.col(j) = (up.u - dn.u) / (2.0 * h);
    } else if (up.converged || dn.converged) {
      const BranchFlowState& ok = up.converged ? up : dn;
      const BranchFlowState mid = solve_ac(topo, f, p);
      const double sign = up.converged ? 1.0 : -1.0;
      lin.g_s[j] = sign * (ok.head_s - mid.head_s) / h;
      lin.ju.col(j) = sign * (ok.u - mid.u) / h;
    } else {
      const BranchFlowState mid = solve_ac(topo, f, p);
      const double ds = mid.head_s > 0 ? mid.head_p / mid.head_s : 1.0;
      lin.g_s[j] = ds;
      lin.ju.col(j) = -sens.R.col(j);
    }
  }
  return lin;
}

struct SlpOutcome {
  Eigen::VectorXd p;
  double combined = 0.0;
  bool converged = false;
  int outer = 0;
};

// One linearization run from an AC-feasible start. The returned point is
// always AC-feasible: only re-simulated, in-limit steps are kept.
SlpOutcome slp_from(const Topology& topo, const Feeder& f, DoeCase c,
                    const NlpOptions& opt, const Eigen::VectorXd& start,
                    const SensitivityMatrices& sens, SlpTrace* trace) {
  const int n = topo.n;
  const bool import = c == DoeCase::Import;
  const double sigma = import ? 1.0 : -1.0;
  const double s_rating = f.transformer_rating;
  const double u_lo = f.u_min();
  const double u_hi = f.u_max();

  // Trust-region ceiling per node: the envelope span when finite, otherwise
  // a multiple of the transformer rating as a generous finite stand-in.
  Eigen::VectorXd box(n);
  for (int j = 0; j < n; ++j) {
    const double bound = import ? f.envelope_upper[j] : -f.envelope_lower[j];
    box[j] = std::isfinite(bound) ? bound : 4.0 * s_rating;
  }
  Eigen::VectorXd trust = 0.2 * box;

  SlpOutcome out;
  out.p = start;
  for (int j = 0; j < n; ++j) {
    out.p[j] = import ? std::max(out.p[j], 0.0) : std::min(out.p[j], 0.0);
  }

  for (int outer = 1; outer <= opt.max_outer; ++outer) {
    out.outer = outer;
    const BranchFlowState st = solve_ac(topo, f, out.p);
    const Linearization lin = linearize(topo, f, out.p, opt.fd_step, sens);

    LpProblem sub;
    sub.objective = Eigen::VectorXd::Constant(n, sigma);
    sub.row_coeffs = Eigen::MatrixXd(2 * n + 1, n);
    sub.row_rhs = Eigen::VectorXd(2 * n + 1);
    sub.row_sense.assign(2 * n + 1, RowSense::Le);
    sub.row_coeffs.row(0) = lin.g_s.transpose();
    sub.row_rhs[0] = std::max(s_rating - st.head_s, 0.0);
    sub.row_coeffs.middleRows(1, n) = lin.ju;
    sub.row_rhs.segment(1, n) = (u_hi - st.u.array()).max(0.0).matrix();
    sub.row_coeffs.middleRows(1 + n, n) = -lin.ju;
    sub.row_rhs.segment(1 + n, n) = (st.u.array() - u_lo).max(0.0).matrix();
    // Envelopes are one-sided: the trial point must stay on the case's side
    // of zero as well as inside the hard bounds and the trust box.
    sub.lower = Eigen::VectorXd(n);
    sub.upper = Eigen::VectorXd(n);
    for (int j = 0; j < n; ++j) {
      const double lo_p = import ? 0.0 : f.envelope_lower[j];
      const double hi_p = import ? f.envelope_upper[j] : 0.0;
      sub.lower[j] = std::max(lo_p - out.p[j], -trust[j]);
      sub.upper[j] = std::min(hi_p - out.p[j], trust[j]);
    }

    const LpSolution step = solve_simplex(sub);
    bool accepted = false;
    double viol = 0.0;
    Eigen::VectorXd trial = out.p;
    if (step.status == LpStatus::Optimal) {
      if (step.x.cwiseAbs().maxCoeff() < opt.step_converged) {
        out.converged = true;
        break;
      }
      trial = out.p + step.x;
      const BranchFlowState ts = solve_ac(topo, f, trial);
      viol = ts.converged ? rel_violation(f, ts) : kInf;
      accepted = ac_ok(f, ts, opt.feasibility_rel);
    }

    if (trace) {
      SlpStep rec;
      rec.p = trial;
      rec.combined = trial.sum();
      rec.trust = trust.maxCoeff();
      rec.violation = viol;
      rec.accepted = accepted;
      trace->steps.push_back(std::move(rec));
    }

    if (accepted) {
      out.p = trial;
      // Expand only when the step pressed against the trust radius; interior
      // steps end at a model constraint and re-inflating just causes chatter.
      if ((step.x.cwiseAbs().array() >= 0.99 * trust.array()).any()) {
        trust = (2.0 * trust).cwiseMin(box);
      }
    } else {
      trust *= 0.5;
      if (trust.maxCoeff() < 0.25) {
        // Sub-watt region: re-simulation noise dominates, call it settled.
        out.converged = true;
        break;
      }
    }
  }

  out.combined = out.p.sum();
  if (trace) trace->converged = out.converged;
  return out;
}

// Damp a candidate toward zero until the full model accepts it.
std::optional<Eigen::VectorXd> backtrack_feasible(const Topology& topo, const Feeder& f,
                                                  Eigen::VectorXd p, double tol) {
  for (int k = 0; k < 60; ++k) {
    if (ac_ok(f, solve_ac(topo, f, p), tol)) return p;
    p *= 0.9;
  }
  return std::nullopt;
}

void detect_binding(DoeResult& res, const Feeder& f, const BranchFlowState& st,
                    DoeCase c) {
  const double rel = 1e-4;
  if (f.transformer_rating - st.head_s <= rel * f.transformer_rating) {
    res.binding.push_back({BindingKind::Thermal, 0});
  }
  for (int m = 0; m < st.u.size(); ++m) {
    const bool low = st.u[m] - f.u_min() <= rel * f.u0();
    const bool high = f.u_max() - st.u[m] <= rel * f.u0();
    if (low || high) res.binding.push_back({BindingKind::Voltage, m + 1});
  }
  const bool import = c == DoeCase::Import;
  for (int j = 0; j < res.envelopes.size(); ++j) {
    const double bound = import ? f.envelope_upper[j] : f.envelope_lower[j];
    if (!std::isfinite(bound)) continue;
    if (std::abs(res.envelopes[j] - bound) <= 1e-6 * (1.0 + std::abs(bound))) {
      res.binding.push_back({BindingKind::EnvelopeBound, j + 1});
    }
  }
}

DoeResult result_from_point(const std::string& engine, const Topology& topo,
                            const Feeder& f, DoeCase c, const Eigen::VectorXd& p,
                            int iterations) {
  DoeResult res;
  res.engine = engine;
  res.doe_case = c;
  res.envelopes = p;
  res.combined = p.sum();
  res.iterations = iterations;
  const BranchFlowState st = solve_ac(topo, f, p);
  res.v_min_pu = st.v_min(f);
  res.v_max_pu = st.v_max(f);
  res.s01_kva = st.signed_head_s() / 1e3;
  res.ac_v_min_pu = res.v_min_pu;
  res.ac_v_max_pu = res.v_max_pu;
  res.ac_s01_kva = res.s01_kva;
  res.ac_converged = st.converged;
  detect_binding(res, f, st, c);
  return res;
}

void throw_pre_violation(const Feeder& f, const BranchFlowState& st) {
  if (st.head_s > f.transformer_rating) {
    throw PreViolationError("base apparent power exceeds transformer rating (VA)", st.head_s);
  }
  for (int m = 0; m < st.u.size(); ++m) {
    if (st.u[m] < f.u_min()) {
      throw PreViolationError("base load under-voltage, squared voltage (V^2)", st.u[m], m + 1);
    }
    if (st.u[m] > f.u_max()) {
      throw PreViolationError("base load over-voltage, squared voltage (V^2)", st.u[m], m + 1);
    }
  }
}

}  // namespace

DoeResult run_nlp_doe(const Feeder& f, DoeCase c, const NlpOptions& opt,
                      std::vector<SlpTrace>* traces) {
  const Topology topo(f);
  const int n = topo.n;
  const bool import = c == DoeCase::Import;
  const double sigma = import ? 1.0 : -1.0;

  const BranchFlowState base = solve_ac(topo, f, Eigen::VectorXd::Zero(n));
  if (!base.converged) {
    throw SolverFailure("full power flow diverged at the base operating point");
  }
  if (rel_violation(f, base) > opt.feasibility_rel) throw_pre_violation(f, base);

  const SensitivityMatrices sens = sensitivity_matrices(topo);

  std::vector<std::pair<std::string, Eigen::VectorXd>> starts;
  starts.emplace_back("zero", Eigen::VectorXd::Zero(n));

  try {
    const DoeResult lp = run_lp_doe(f, c);
    if (auto p = backtrack_feasible(topo, f, lp.envelopes, opt.feasibility_rel)) {
      starts.emplace_back("lp", *p);
    }
  } catch (const std::exception&) {
    // No lp seed; the remaining starts cover the search.
  }

  std::optional<SpareCapacity> sp;
  try {
    sp = spare_capacity(topo, f);
  } catch (const std::exception&) {
  }
  std::vector<int> solo_nodes;
  if (n <= 12) {
    for (int m = 1; m <= n; ++m) solo_nodes.push_back(m);
  } else {
    // Large feeder: seed the shallow and deep extremes of the participating set.
    int shallow = 0, deep = 0, resistive = 0;
    for (int m = 1; m <= n; ++m) {
      const double bound = import ? f.envelope_upper[m - 1] : f.envelope_lower[m - 1];
      if (bound == 0.0) continue;
      if (!shallow || topo.depth[m] < topo.depth[shallow]) shallow = m;
      if (!deep || topo.depth[m] > topo.depth[deep]) deep = m;
      if (!resistive || topo.path_r[m] > topo.path_r[resistive]) resistive = m;
    }
    for (int m : {shallow, deep, resistive}) {
      if (m && std::find(solo_nodes.begin(), solo_nodes.end(), m) == solo_nodes.end()) {
        solo_nodes.push_back(m);
      }
    }
  }
  Eigen::VectorXd solo;
  if (sp) {
    std::vector<int> all(n);
    for (int m = 1; m <= n; ++m) all[m - 1] = m;
    solo = solo_envelopes(sens, import ? sp->e_hat : sp->e_breve, c, all);
  }
  for (int m : solo_nodes) {
    double v;
    if (sp) {
      v = import ? std::min({sp->p_hat, solo[m - 1], f.envelope_upper[m - 1]})
                 : std::max({sp->p_breve, solo[m - 1], f.envelope_lower[m - 1]});
    } else {
      v = sigma * f.transformer_rating;
    }
    if (v == 0.0 || !std::isfinite(v)) continue;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    p[m - 1] = 0.9 * v;
    if (auto q = backtrack_feasible(topo, f, p, opt.feasibility_rel)) {
      starts.emplace_back("solo@" + std::to_string(m), *q);
    }
  }

  // Every run ends on an AC-verified point, so a round-limited run is still a
  // valid (if possibly improvable) envelope set: keep the best point overall.
  std::optional<SlpOutcome> best;
  int best_outer = 0;
  for (const auto& [name, start] : starts) {
    SlpTrace local;
    local.start_name = name;
    SlpOutcome run = slp_from(topo, f, c, opt, start, sens, traces ? &local : nullptr);
    if (traces) traces->push_back(std::move(local));
    if (!best || sigma * run.combined > sigma * best->combined) {
      best = std::move(run);
      best_outer = best->outer;
    }
  }
  if (!best) {
    throw SolverFailure("nlp allocation produced no candidate point");
  }
  return result_from_point("nlp", topo, f, c, best->p, best_outer);
}

BisectResult oracle_bisect(const Feeder& f, int node, DoeCase c, double tol_w) {
  const Topology topo(f);
  const int n = topo.n;
  const bool import = c == DoeCase::Import;
  const double sigma = import ? 1.0 : -1.0;
  const double bound = import ? f.envelope_upper[node - 1] : f.envelope_lower[node - 1];
  const double tol = 1e-6;

  auto feasible_at = [&](double v) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    p[node - 1] = v;
    return ac_ok(f, solve_ac(topo, f, p), tol);
  };

  if (!feasible_at(0.0)) {
    throw PreViolationError("base operating point violates a limit (W)", 0.0, node);
  }

  double lo = 0.0;  // last feasible magnitude
  double step = 1e3;
  double hi = -1.0;  // first infeasible magnitude, <0 while unknown
  const double cap = std::isfinite(bound) ? std::abs(bound) : 1e9;
  while (hi < 0.0) {
    const double probe = std::min(step, cap);
    if (feasible_at(sigma * probe)) {
      lo = probe;
      if (probe >= cap) return {sigma * cap, true};
      step *= 2.0;
    } else {
      hi = probe;
    }
  }
  while (hi - lo > tol_w) {
    const double mid = 0.5 * (lo + hi);
    (feasible_at(sigma * mid) ? lo : hi) = mid;
  }
  return {sigma * lo, false};
}

DoeResult oracle_grid(const Feeder& f, DoeCase c, double resolution_w) {
  const Topology topo(f);
  const int n = topo.n;
  if (n > 3) throw ValidationError("grid oracle handles at most three customer nodes");
  const bool import = c == DoeCase::Import;
  const double sigma = import ? 1.0 : -1.0;
  const double tol = 1e-6;

  auto feasible_at = [&](const Eigen::VectorXd& p) { return ac_ok(f, solve_ac(topo, f, p), tol); };

  if (!feasible_at(Eigen::VectorXd::Zero(n))) {
    throw PreViolationError("base operating point violates a limit (W)", 0.0);
  }

  // Per-axis step caps: walk each axis alone until the first infeasible
  // point or the envelope bound.
  std::vector<int> cap(n, 0);
  for (int j = 0; j < n; ++j) {
    const double bound = import ? f.envelope_upper[j] : f.envelope_lower[j];
    const int bound_steps =
        std::isfinite(bound) ? static_cast<int>(std::floor(std::abs(bound) / resolution_w))
                             : std::numeric_limits<int>::max();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    int k = 0;
    while (k < bound_steps) {
      p[j] = sigma * (k + 1) * resolution_w;
      if (!feasible_at(p)) break;
      ++k;
    }
    cap[j] = k;
  }

  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_sum = 0.0;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  long long evaluated = 0;

  // Nested scan; along the innermost axis feasibility is monotone over the
  // capped range, so the first failure ends that strip.
  auto scan = [&](auto&& self, int axis) -> void {
    if (axis == n - 1) {
      for (int k = 0; k <= cap[axis]; ++k) {
        p[axis] = sigma * k * resolution_w;
        ++evaluated;
        if (!feasible_at(p)) break;
        const double s = sigma * p.sum();
        if (s > best_sum) {
          best_sum = s;
          best = p;
        }
      }
      p[axis] = 0.0;
      return;
    }
    for (int k = 0; k <= cap[axis]; ++k) {
      p[axis] = sigma * k * resolution_w;
      self(self, axis + 1);
    }
    p[axis] = 0.0;
  };
  scan(scan, 0);

  DoeResult res = result_from_point("oracle-grid", topo, f, c, best, static_cast<int>(evaluated));
  return res;
}

}  // namespace doe
