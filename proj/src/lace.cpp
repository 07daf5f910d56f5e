#include "doe/lace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "doe/errors.hpp"
#include "doe/power_flow.hpp"

namespace doe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Solo envelope of one node plus the margin row that produced it.
struct SoloValue {
  double value = 0.0;
  int limiting_row = 0;  // node whose margin binds, 0 when unbounded
};

SoloValue solo_one(const SensitivityMatrices& sens, const Eigen::VectorXd& e_spare,
                   DoeCase c, int node) {
  const auto col = sens.R.col(node - 1);
  SoloValue best;
  bool found = false;
  for (int m = 0; m < e_spare.size(); ++m) {
    if (col[m] <= 0.0) continue;
    const double ratio = e_spare[m] / col[m];
    if (!found || (c == DoeCase::Import ? ratio < best.value : ratio > best.value)) {
      best.value = ratio;
      best.limiting_row = m + 1;
      found = true;
    }
  }
  if (!found) best.value = c == DoeCase::Import ? kInf : -kInf;
  return best;
}

}  // namespace

Eigen::VectorXd solo_envelopes(const SensitivityMatrices& sens,
                               const Eigen::VectorXd& e_spare, DoeCase c,
                               const std::vector<int>& active) {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(sens.R.rows(), kNaN);
  for (int node : active) out[node - 1] = solo_one(sens, e_spare, c, node).value;
  return out;
}

DoeResult run_lace(const Feeder& f, DoeCase c, LaceTrace* trace) {
  const Topology topo(f);
  const SensitivityMatrices sens = sensitivity_matrices(topo);
  const SpareCapacity sp = spare_capacity(topo, f);
  const int n = topo.n;
  const bool import = c == DoeCase::Import;

  double thermal = import ? sp.p_hat : sp.p_breve;
  Eigen::VectorXd e_spare = import ? sp.e_hat : sp.e_breve;
  const Eigen::VectorXd& env_bound = import ? f.envelope_upper : f.envelope_lower;

  // Exhaustion guards: spare below a sliver of its initial size counts as
  // spent, so rounding residue cannot spin extra rounds.
  const double tol_thermal = 1e-9 * std::abs(thermal);
  const double tol_voltage = 1e-9 * e_spare.cwiseAbs().maxCoeff();

  std::vector<int> active(n);
  for (int m = 1; m <= n; ++m) active[m - 1] = m;

  DoeResult res;
  res.engine = "lace";
  res.doe_case = c;
  res.envelopes = Eigen::VectorXd::Zero(n);

  auto spare_left = [&] {
    if (import) return thermal > tol_thermal && e_spare.minCoeff() > tol_voltage;
    return thermal < -tol_thermal && e_spare.maxCoeff() < -tol_voltage;
  };

  while (!active.empty() && spare_left()) {
    ++res.iterations;

    // Rank the active nodes by how much each could take alone; serve the
    // most capable one first, lowest node id on ties.
    int pick = 0;
    SoloValue pick_solo;
    Eigen::VectorXd solo_all = Eigen::VectorXd::Constant(n, kNaN);
    for (int node : active) {
      const SoloValue sv = solo_one(sens, e_spare, c, node);
      solo_all[node - 1] = sv.value;
      const bool better = pick == 0 || (import ? sv.value > pick_solo.value
                                               : sv.value < pick_solo.value);
      if (better) {
        pick = node;
        pick_solo = sv;
      }
    }

    // The node gets the tightest of its envelope bound, the thermal spare
    // and its solo voltage envelope.
    double alloc;
    BindingConstraint limit;
    const double bound = env_bound[pick - 1];
    if (import) {
      alloc = std::min({bound, thermal, pick_solo.value});
      if (alloc == bound) limit = {BindingKind::EnvelopeBound, pick};
      else if (alloc == thermal) limit = {BindingKind::Thermal, 0};
      else limit = {BindingKind::Voltage, pick_solo.limiting_row};
    } else {
      alloc = std::max({bound, thermal, pick_solo.value});
      if (alloc == bound) limit = {BindingKind::EnvelopeBound, pick};
      else if (alloc == thermal) limit = {BindingKind::Thermal, 0};
      else limit = {BindingKind::Voltage, pick_solo.limiting_row};
    }

    res.envelopes[pick - 1] = alloc;
    thermal -= alloc;
    e_spare -= sens.R.col(pick - 1) * alloc;
    active.erase(std::find(active.begin(), active.end(), pick));

    if (alloc != 0.0 || limit.kind == BindingKind::EnvelopeBound) {
      if (std::find(res.binding.begin(), res.binding.end(), limit) == res.binding.end()) {
        res.binding.push_back(limit);
      }
    }

    if (trace) {
      LaceIteration it;
      it.node = pick;
      it.solo = std::move(solo_all);
      it.allocated = alloc;
      it.limit = limit;
      it.thermal_left = thermal;
      it.voltage_left = e_spare;
      trace->rounds.push_back(std::move(it));
    }
  }

  res.combined = res.envelopes.sum();

  const BranchFlowState lin = solve_linear(topo, f, res.envelopes);
  res.v_min_pu = lin.v_min(f);
  res.v_max_pu = lin.v_max(f);
  res.s01_kva = lin.signed_head_s() / 1e3;
  attach_ac_check(res, topo, f);
  return res;
}

}  // namespace doe
