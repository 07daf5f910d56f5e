#include "doe/power_flow.hpp"

#include <cmath>

#include "doe/errors.hpp"

namespace doe {

double BranchFlowState::v_min(const Feeder& f) const {
  return std::min(std::sqrt(u.minCoeff()), f.slack_voltage) / f.base_voltage;
}

double BranchFlowState::v_max(const Feeder& f) const {
  return std::max(std::sqrt(u.maxCoeff()), f.slack_voltage) / f.base_voltage;
}

double BranchFlowState::signed_head_s() const {
  return head_p < 0 ? -head_s : head_s;
}

BranchFlowState solve_linear(const Topology& topo, const Feeder& f,
                             const Eigen::VectorXd& p_envelope) {
  const int n = topo.n;
  BranchFlowState st;
  st.line_p = f.base_load_p + p_envelope;
  st.line_q = f.base_load_q;
  st.current_sq = Eigen::VectorXd::Zero(n);
  st.u = Eigen::VectorXd::Zero(n);

  for (auto it = topo.bfs_order.rbegin(); it != topo.bfs_order.rend(); ++it) {
    const int m = *it;
    if (topo.parent[m] != 0) {
      st.line_p[topo.parent[m] - 1] += st.line_p[m - 1];
      st.line_q[topo.parent[m] - 1] += st.line_q[m - 1];
    } else {
      st.head_p += st.line_p[m - 1];
      st.head_q += st.line_q[m - 1];
    }
  }
  for (int m : topo.bfs_order) {
    const double up = topo.parent[m] == 0 ? f.u0() : st.u[topo.parent[m] - 1];
    st.u[m - 1] = up - 2.0 * (topo.edge_r[m] * st.line_p[m - 1] +
                              topo.edge_x[m] * st.line_q[m - 1]);
  }
  st.head_s = std::hypot(st.head_p, st.head_q);
  return st;
}

BranchFlowState solve_linear(const Feeder& f, const Eigen::VectorXd& p_envelope) {
  return solve_linear(Topology(f), f, p_envelope);
}

BranchFlowState solve_ac(const Topology& topo, const Feeder& f,
                         const Eigen::VectorXd& p_envelope, const AcOptions& opt) {
  const int n = topo.n;
  const double u0 = f.u0();
  const Eigen::VectorXd inj_p = f.base_load_p + p_envelope;
  const Eigen::VectorXd& inj_q = f.base_load_q;

  BranchFlowState st;
  st.line_p = Eigen::VectorXd::Zero(n);
  st.line_q = Eigen::VectorXd::Zero(n);
  st.current_sq = Eigen::VectorXd::Zero(n);
  st.u = Eigen::VectorXd::Constant(n, u0);
  st.converged = false;

  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    // Backward: receiving-end sums, then the loss term r*l moves the flow to
    // the sending end. l uses the receiving-end voltage of the last sweep.
    for (auto it = topo.bfs_order.rbegin(); it != topo.bfs_order.rend(); ++it) {
      const int m = *it;
      double pr = inj_p[m - 1];
      double qr = inj_q[m - 1];
      for (int c : topo.children[m]) {
        pr += st.line_p[c - 1];
        qr += st.line_q[c - 1];
      }
      const double l = (pr * pr + qr * qr) / st.u[m - 1];
      st.current_sq[m - 1] = l;
      st.line_p[m - 1] = pr + topo.edge_r[m] * l;
      st.line_q[m - 1] = qr + topo.edge_x[m] * l;
    }
    // Forward: propagate squared voltages from the slack.
    double max_du = 0.0;
    bool collapsed = false;
    for (int m : topo.bfs_order) {
      const double up = topo.parent[m] == 0 ? u0 : st.u[topo.parent[m] - 1];
      const double r = topo.edge_r[m];
      const double x = topo.edge_x[m];
      const double unew = up - 2.0 * (r * st.line_p[m - 1] + x * st.line_q[m - 1]) +
                          (r * r + x * x) * st.current_sq[m - 1];
      max_du = std::max(max_du, std::abs(unew - st.u[m - 1]));
      st.u[m - 1] = unew;
      if (unew < 1e-6 * u0) collapsed = true;
    }
    st.iterations = iter;
    if (collapsed) break;  // operating point past the deliverable-power nose
    if (max_du < opt.tolerance * u0) {
      st.converged = true;
      break;
    }
  }

  st.head_p = 0.0;
  st.head_q = 0.0;
  for (int c : topo.children[0]) {
    st.head_p += st.line_p[c - 1];
    st.head_q += st.line_q[c - 1];
  }
  st.head_s = std::hypot(st.head_p, st.head_q);
  return st;
}

BranchFlowState solve_ac(const Feeder& f, const Eigen::VectorXd& p_envelope,
                         const AcOptions& opt) {
  return solve_ac(Topology(f), f, p_envelope, opt);
}

SpareCapacity spare_capacity(const Topology& topo, const Feeder& f) {
  SpareCapacity sp;
  sp.p_base = f.base_load_p.sum();
  sp.q_base = f.base_load_q.sum();
  const double s_rating = f.transformer_rating;
  if (std::abs(sp.q_base) > s_rating) {
    throw PreViolationError("base reactive power exceeds transformer rating (var)", sp.q_base);
  }
  sp.p_bar = std::sqrt(s_rating * s_rating - sp.q_base * sp.q_base);
  sp.p_hat = sp.p_bar - sp.p_base;
  sp.p_breve = -sp.p_bar - sp.p_base;
  if (sp.p_hat < 0) {
    throw PreViolationError("base real power exceeds import transfer limit (W)", sp.p_base);
  }
  if (sp.p_breve > 0) {
    throw PreViolationError("base generation exceeds export transfer limit (W)", sp.p_base);
  }

  const BranchFlowState base = solve_linear(topo, f, Eigen::VectorXd::Zero(topo.n));
  sp.e_tilde = (f.u0() - base.u.array()).matrix();
  sp.e_bar = f.u0() - f.u_min();
  sp.e_lower = f.u0() - f.u_max();
  sp.e_hat = (sp.e_bar - sp.e_tilde.array()).matrix();
  sp.e_breve = (sp.e_lower - sp.e_tilde.array()).matrix();

  for (int m = 1; m <= topo.n; ++m) {
    if (sp.e_hat[m - 1] < 0) {
      throw PreViolationError("base load under-voltage, squared-voltage margin (V^2)",
                              sp.e_hat[m - 1], m);
    }
    if (sp.e_breve[m - 1] > 0) {
      throw PreViolationError("base load over-voltage, squared-voltage margin (V^2)",
                              sp.e_breve[m - 1], m);
    }
  }
  return sp;
}

SpareCapacity spare_capacity(const Feeder& f) { return spare_capacity(Topology(f), f); }

}  // namespace doe
