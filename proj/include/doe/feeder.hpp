#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace doe {

// One series line segment. Node ids are internal: 0 is the slack (feeder
// head), customer nodes are 1..N. Loaders renumber arbitrary file labels
// into this scheme; Feeder::node_labels maps back.
struct LineSegment {
  int from_node = 0;
  int to_node = 0;
  double resistance = 0.0;  // ohm
  double reactance = 0.0;   // ohm
};

// Radial LV feeder snapshot. All quantities SI: watts, vars, volts, VA.
// Vectors have one entry per customer node; entry m-1 belongs to node m.
struct Feeder {
  int node_count = 0;  // N, slack excluded
  std::vector<LineSegment> lines;

  double base_voltage = 230.0;     // V, per-unit base
  double slack_voltage = 230.0;    // V, held at the feeder head
  double voltage_min = 207.0;      // V
  double voltage_max = 253.0;      // V
  double transformer_rating = 0.0; // VA, apparent-power limit at the head

  Eigen::VectorXd base_load_p;  // W, uncontrolled demand (positive = consumption)
  Eigen::VectorXd base_load_q;  // var
  Eigen::VectorXd envelope_lower;  // W, <= 0, -inf when unbounded
  Eigen::VectorXd envelope_upper;  // W, >= 0, +inf when unbounded

  std::vector<std::int64_t> node_labels;  // original file ids, entry m-1 for node m

  double u0() const { return slack_voltage * slack_voltage; }        // V^2
  double u_min() const { return voltage_min * voltage_min; }
  double u_max() const { return voltage_max * voltage_max; }
};

// Structural findings for a feeder. `issues` lists every reason the network
// is unusable; empty means radial, connected and consistently labeled.
struct TopologyReport {
  int node_count = 0;
  int line_count = 0;
  bool connected = false;
  bool is_tree = false;
  int slack_adjacent_count = 0;
  int lateral_count = 0;  // non-slack nodes with two or more children
  int max_depth = 0;
  std::vector<int> depth;  // entry m-1 for node m, -1 when unreachable
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
};

TopologyReport validate_radial(const Feeder& feeder);

// Parse the feeder JSON document (schema in docs/feeder_schema.md), validate
// it and renumber nodes breadth-first from the slack. Throws ValidationError.
Feeder load_feeder(const std::string& document);
Feeder load_feeder_file(const std::string& path);

// Parse without the final radiality audit. Renumbering still needs a single
// slack and reachable nodes, but consistency checks (line/node counts, limit
// ordering, zero-resistance paths) are left for validate_radial to report.
Feeder parse_feeder(const std::string& document);

std::string feeder_to_json(const Feeder& feeder);

// Parent/child view of a valid radial feeder, used by every solver.
// Construction throws ValidationError when the line list is not a tree.
struct Topology {
  int n = 0;
  std::vector<int> parent;                 // size n+1, parent[0] = -1
  std::vector<double> edge_r, edge_x;      // size n+1, edge from parent[m] to m
  std::vector<std::vector<int>> children;  // size n+1
  std::vector<int> bfs_order;              // nodes 1..n, parents before children
  std::vector<int> depth;                  // size n+1
  std::vector<double> path_r, path_x;      // accumulated impedance from slack

  explicit Topology(const Feeder& feeder);
};

}  // namespace doe
