#include "doe/doe_result.hpp"

#include <cmath>

namespace doe {

std::string BindingConstraint::tag() const {
  switch (kind) {
    case BindingKind::Thermal:
      return "thermal";
    case BindingKind::Voltage:
      return "voltage@" + std::to_string(node);
    case BindingKind::EnvelopeBound:
      return "envelope-bound@" + std::to_string(node);
  }
  return "?";
}

void attach_ac_check(DoeResult& result, const Topology& topo, const Feeder& f) {
  const BranchFlowState ac = solve_ac(topo, f, result.envelopes);
  result.ac_converged = ac.converged;
  if (ac.converged) {
    result.ac_v_min_pu = ac.v_min(f);
    result.ac_v_max_pu = ac.v_max(f);
    result.ac_s01_kva = ac.signed_head_s() / 1e3;
  } else {
    result.ac_v_min_pu = result.ac_v_max_pu = result.ac_s01_kva =
        std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace doe
