#include "doe/sensitivity.hpp"

#include <vector>

namespace doe {

SensitivityMatrices sensitivity_matrices(const Topology& topo) {
  const int n = topo.n;
  SensitivityMatrices s;
  s.R = Eigen::MatrixXd::Zero(n, n);
  s.X = Eigen::MatrixXd::Zero(n, n);

  // Subtrees are contiguous in a DFS ordering, which turns each row into
  // "copy the parent row, overwrite my subtree" and keeps the build O(N^2).
  std::vector<int> euler;
  euler.reserve(n);
  std::vector<int> tin(n + 1, 0), tout(n + 1, 0);
  std::vector<int> stack{0};
  std::vector<size_t> child_pos(n + 1, 0);
  while (!stack.empty()) {
    const int cur = stack.back();
    if (child_pos[cur] == 0 && cur != 0) {
      tin[cur] = static_cast<int>(euler.size());
      euler.push_back(cur);
    }
    if (child_pos[cur] < topo.children[cur].size()) {
      stack.push_back(topo.children[cur][child_pos[cur]++]);
    } else {
      if (cur != 0) tout[cur] = static_cast<int>(euler.size());
      stack.pop_back();
    }
  }

  for (int m : topo.bfs_order) {
    const int row = m - 1;
    if (topo.parent[m] != 0) {
      s.R.row(row) = s.R.row(topo.parent[m] - 1);
      s.X.row(row) = s.X.row(topo.parent[m] - 1);
    }
    const double rr = 2.0 * topo.path_r[m];
    const double xx = 2.0 * topo.path_x[m];
    for (int i = tin[m]; i < tout[m]; ++i) {
      s.R(row, euler[i] - 1) = rr;
      s.X(row, euler[i] - 1) = xx;
    }
  }
  return s;
}

SensitivityMatrices sensitivity_matrices(const Feeder& feeder) {
  return sensitivity_matrices(Topology(feeder));
}

}  // namespace doe
