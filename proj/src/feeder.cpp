#include "doe/feeder.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "doe/errors.hpp"
#include "json.hpp"

namespace doe {

namespace {

using nlohmann::json;

double require_number(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw ValidationError(std::string("feeder schema: missing or non-numeric \"") + key + "\"");
  }
  return obj[key].get<double>();
}

std::int64_t require_id(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number_integer()) {
    throw ValidationError(std::string("feeder schema: missing or non-integer \"") + key + "\"");
  }
  return obj[key].get<std::int64_t>();
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Feeder parse_feeder(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("feeder schema: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("feeder schema: top level must be an object");

  Feeder f;
  const double base_kv = require_number(doc, "base_voltage_kv");
  const double slack_pu = require_number(doc, "slack_voltage_pu");
  const double vmin_pu = require_number(doc, "v_min_pu");
  const double vmax_pu = require_number(doc, "v_max_pu");
  const double rating_kva = require_number(doc, "transformer_kva");

  if (base_kv <= 0) throw ValidationError("feeder schema: base_voltage_kv must be positive");
  if (rating_kva <= 0) throw ValidationError("feeder schema: transformer_kva must be positive");
  if (!(vmin_pu < slack_pu && slack_pu < vmax_pu)) {
    throw ValidationError("feeder schema: require v_min_pu < slack_voltage_pu < v_max_pu");
  }

  f.base_voltage = base_kv * 1e3;
  f.slack_voltage = slack_pu * f.base_voltage;
  f.voltage_min = vmin_pu * f.base_voltage;
  f.voltage_max = vmax_pu * f.base_voltage;
  f.transformer_rating = rating_kva * 1e3;

  if (!doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty()) {
    throw ValidationError("feeder schema: \"nodes\" must be a non-empty array");
  }
  if (!doc.contains("lines") || !doc["lines"].is_array() || doc["lines"].empty()) {
    throw ValidationError("feeder schema: \"lines\" must be a non-empty array");
  }

  struct NodeRec {
    std::int64_t label;
    double p, q, lo, hi;
  };
  std::vector<NodeRec> nodes;
  std::set<std::int64_t> seen;
  for (const auto& jn : doc["nodes"]) {
    NodeRec rec;
    rec.label = require_id(jn, "id");
    rec.p = require_number(jn, "p_kw") * 1e3;
    rec.q = require_number(jn, "q_kvar") * 1e3;
    rec.lo = -kInf;
    rec.hi = kInf;
    if (jn.contains("env_min_kw") && !jn["env_min_kw"].is_null()) {
      rec.lo = require_number(jn, "env_min_kw") * 1e3;
    }
    if (jn.contains("env_max_kw") && !jn["env_max_kw"].is_null()) {
      rec.hi = require_number(jn, "env_max_kw") * 1e3;
    }
    if (rec.lo > 0 || rec.hi < 0) {
      throw ValidationError("feeder schema: envelope bounds must satisfy env_min_kw <= 0 <= env_max_kw (node " +
                            std::to_string(rec.label) + ")");
    }
    if (!seen.insert(rec.label).second) {
      throw ValidationError("feeder schema: duplicate node id " + std::to_string(rec.label));
    }
    nodes.push_back(rec);
  }

  struct LineRec {
    std::int64_t from, to;
    double r, x;
  };
  std::vector<LineRec> lines;
  for (const auto& jl : doc["lines"]) {
    LineRec rec;
    rec.from = require_id(jl, "from");
    rec.to = require_id(jl, "to");
    rec.r = require_number(jl, "r_ohm");
    rec.x = require_number(jl, "x_ohm");
    if (rec.r < 0 || rec.x < 0) {
      throw ValidationError("feeder schema: line impedances must be non-negative (" +
                            std::to_string(rec.from) + "->" + std::to_string(rec.to) + ")");
    }
    lines.push_back(rec);
  }

  // The slack is whichever label sends power but never receives it.
  std::set<std::int64_t> from_labels, to_labels;
  for (const auto& l : lines) {
    from_labels.insert(l.from);
    to_labels.insert(l.to);
  }
  std::vector<std::int64_t> roots;
  for (auto lbl : from_labels) {
    if (!to_labels.count(lbl) && !seen.count(lbl)) roots.push_back(lbl);
  }
  if (roots.size() != 1) {
    throw ValidationError("feeder topology: expected exactly one slack label (a line endpoint that never "
                          "receives and carries no load), found " + std::to_string(roots.size()));
  }
  const std::int64_t slack = roots[0];

  for (const auto& l : lines) {
    if (l.to == slack) throw ValidationError("feeder topology: line feeds the slack node");
    if (!seen.count(l.to)) {
      throw ValidationError("feeder topology: line feeds undeclared node " + std::to_string(l.to));
    }
    if (l.from != slack && !seen.count(l.from)) {
      throw ValidationError("feeder topology: line leaves undeclared node " + std::to_string(l.from));
    }
  }

  // Renumber breadth-first from the slack so parents precede children and
  // vectors can be indexed by node id.
  std::map<std::int64_t, std::vector<const LineRec*>> out_edges;
  for (const auto& l : lines) out_edges[l.from].push_back(&l);
  for (auto& [lbl, edges] : out_edges) {
    std::sort(edges.begin(), edges.end(),
              [](const LineRec* a, const LineRec* b) { return a->to < b->to; });
  }

  std::map<std::int64_t, int> internal_id;
  internal_id[slack] = 0;
  std::deque<std::int64_t> queue{slack};
  std::vector<LineSegment> ordered_lines;
  while (!queue.empty()) {
    const std::int64_t cur = queue.front();
    queue.pop_front();
    auto it = out_edges.find(cur);
    if (it == out_edges.end()) continue;
    for (const LineRec* l : it->second) {
      if (internal_id.count(l->to)) {
        throw ValidationError("feeder topology: node " + std::to_string(l->to) +
                              " is fed by more than one line or sits on a loop");
      }
      internal_id[l->to] = static_cast<int>(internal_id.size());
      ordered_lines.push_back({internal_id[cur], internal_id[l->to], l->r, l->x});
      queue.push_back(l->to);
    }
  }
  if (internal_id.size() != nodes.size() + 1) {
    std::string missing;
    for (const auto& n : nodes) {
      if (!internal_id.count(n.label)) {
        if (!missing.empty()) missing += ", ";
        missing += std::to_string(n.label);
      }
    }
    throw ValidationError("feeder topology: unreachable node(s) " + missing);
  }

  const int n = static_cast<int>(nodes.size());
  f.node_count = n;
  f.lines = std::move(ordered_lines);
  f.base_load_p = Eigen::VectorXd::Zero(n);
  f.base_load_q = Eigen::VectorXd::Zero(n);
  f.envelope_lower = Eigen::VectorXd::Constant(n, -kInf);
  f.envelope_upper = Eigen::VectorXd::Constant(n, kInf);
  f.node_labels.assign(n, 0);
  for (const auto& rec : nodes) {
    const int m = internal_id.at(rec.label);
    f.base_load_p[m - 1] = rec.p;
    f.base_load_q[m - 1] = rec.q;
    f.envelope_lower[m - 1] = rec.lo;
    f.envelope_upper[m - 1] = rec.hi;
    f.node_labels[m - 1] = rec.label;
  }
  return f;
}

Feeder load_feeder(const std::string& document) {
  Feeder f = parse_feeder(document);
  TopologyReport report = validate_radial(f);
  if (!report.ok()) {
    std::string msg = "feeder topology:";
    for (const auto& issue : report.issues) msg += " " + issue + ";";
    msg.pop_back();
    throw ValidationError(msg);
  }
  return f;
}

Feeder load_feeder_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open feeder file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_feeder(buf.str());
}

TopologyReport validate_radial(const Feeder& f) {
  TopologyReport rep;
  rep.node_count = f.node_count;
  rep.line_count = static_cast<int>(f.lines.size());
  rep.depth.assign(f.node_count, -1);

  if (f.node_count <= 0) {
    rep.issues.push_back("no customer nodes");
    return rep;
  }
  if (static_cast<int>(f.lines.size()) != f.node_count) {
    rep.issues.push_back("line count " + std::to_string(f.lines.size()) +
                         " does not match node count " + std::to_string(f.node_count));
  }

  std::vector<int> parent(f.node_count + 1, -1);
  std::vector<std::vector<int>> children(f.node_count + 1);
  bool ids_ok = true;
  for (const auto& l : f.lines) {
    if (l.from_node < 0 || l.from_node > f.node_count || l.to_node < 1 || l.to_node > f.node_count) {
      rep.issues.push_back("line endpoint outside 0.." + std::to_string(f.node_count));
      ids_ok = false;
      continue;
    }
    if (parent[l.to_node] != -1) {
      rep.issues.push_back("node " + std::to_string(l.to_node) + " fed by more than one line");
      ids_ok = false;
      continue;
    }
    parent[l.to_node] = l.from_node;
    children[l.from_node].push_back(l.to_node);
  }

  if (ids_ok) {
    std::deque<int> queue{0};
    std::vector<int> depth(f.node_count + 1, -1);
    depth[0] = 0;
    int reached = 0;
    while (!queue.empty()) {
      const int cur = queue.front();
      queue.pop_front();
      for (int c : children[cur]) {
        if (depth[c] != -1) continue;
        depth[c] = depth[cur] + 1;
        ++reached;
        queue.push_back(c);
      }
    }
    rep.connected = reached == f.node_count;
    if (!rep.connected) {
      for (int m = 1; m <= f.node_count; ++m) {
        if (depth[m] == -1) rep.issues.push_back("node " + std::to_string(m) + " unreachable from slack");
      }
    }
    for (int m = 1; m <= f.node_count; ++m) {
      rep.depth[m - 1] = depth[m];
      rep.max_depth = std::max(rep.max_depth, depth[m]);
    }
    rep.slack_adjacent_count = static_cast<int>(children[0].size());
    for (int m = 1; m <= f.node_count; ++m) {
      if (children[m].size() >= 2) ++rep.lateral_count;
    }
    rep.is_tree = rep.connected && static_cast<int>(f.lines.size()) == f.node_count;

    if (rep.connected) {
      // Every node must see nonzero resistance back to the slack, otherwise
      // the voltage sensitivities degenerate.
      std::vector<double> path_r(f.node_count + 1, 0.0);
      for (const auto& l : f.lines) {
        if (depth[l.to_node] == depth[l.from_node] + 1) path_r[l.to_node] = l.resistance;
      }
      std::vector<int> order(f.node_count);
      for (int m = 1; m <= f.node_count; ++m) order[m - 1] = m;
      std::sort(order.begin(), order.end(), [&](int a, int b) { return depth[a] < depth[b]; });
      for (int m : order) path_r[m] += path_r[parent[m]];
      for (int m = 1; m <= f.node_count; ++m) {
        if (path_r[m] <= 0) {
          rep.issues.push_back("zero-resistance path from slack to node " + std::to_string(m));
        }
      }
    }
  }

  const int n = f.node_count;
  auto check_len = [&](const Eigen::VectorXd& v, const char* name) {
    if (v.size() != n) rep.issues.push_back(std::string(name) + " length does not match node count");
  };
  check_len(f.base_load_p, "base_load_p");
  check_len(f.base_load_q, "base_load_q");
  check_len(f.envelope_lower, "envelope_lower");
  check_len(f.envelope_upper, "envelope_upper");
  if (!(f.voltage_min < f.slack_voltage && f.slack_voltage < f.voltage_max)) {
    rep.issues.push_back("require voltage_min < slack_voltage < voltage_max");
  }
  if (f.transformer_rating <= 0) rep.issues.push_back("transformer rating must be positive");
  for (int m = 0; m < n && m < f.envelope_lower.size() && m < f.envelope_upper.size(); ++m) {
    if (f.envelope_lower[m] > 0 || f.envelope_upper[m] < 0) {
      rep.issues.push_back("envelope bounds at node " + std::to_string(m + 1) +
                           " do not bracket zero");
    }
  }
  return rep;
}

Topology::Topology(const Feeder& f) {
  TopologyReport rep = validate_radial(f);
  if (!rep.ok()) {
    std::string msg = "feeder topology:";
    for (const auto& issue : rep.issues) msg += " " + issue + ";";
    msg.pop_back();
    throw ValidationError(msg);
  }
  n = f.node_count;
  parent.assign(n + 1, -1);
  edge_r.assign(n + 1, 0.0);
  edge_x.assign(n + 1, 0.0);
  children.assign(n + 1, {});
  depth.assign(n + 1, 0);
  path_r.assign(n + 1, 0.0);
  path_x.assign(n + 1, 0.0);
  for (const auto& l : f.lines) {
    parent[l.to_node] = l.from_node;
    edge_r[l.to_node] = l.resistance;
    edge_x[l.to_node] = l.reactance;
    children[l.from_node].push_back(l.to_node);
  }
  for (auto& c : children) std::sort(c.begin(), c.end());
  bfs_order.reserve(n);
  std::deque<int> queue{0};
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    for (int c : children[cur]) {
      depth[c] = depth[cur] + 1;
      path_r[c] = path_r[cur] + edge_r[c];
      path_x[c] = path_x[cur] + edge_x[c];
      bfs_order.push_back(c);
      queue.push_back(c);
    }
  }
}

std::string feeder_to_json(const Feeder& f) {
  json doc;
  doc["base_voltage_kv"] = f.base_voltage / 1e3;
  doc["slack_voltage_pu"] = f.slack_voltage / f.base_voltage;
  doc["v_min_pu"] = f.voltage_min / f.base_voltage;
  doc["v_max_pu"] = f.voltage_max / f.base_voltage;
  doc["transformer_kva"] = f.transformer_rating / 1e3;

  auto label_of = [&](int internal) -> std::int64_t {
    if (internal == 0) return 0;
    if (!f.node_labels.empty()) return f.node_labels[internal - 1];
    return internal;
  };

  doc["lines"] = json::array();
  for (const auto& l : f.lines) {
    doc["lines"].push_back({{"from", label_of(l.from_node)},
                            {"to", label_of(l.to_node)},
                            {"r_ohm", l.resistance},
                            {"x_ohm", l.reactance}});
  }
  doc["nodes"] = json::array();
  for (int m = 1; m <= f.node_count; ++m) {
    json jn{{"id", label_of(m)},
            {"p_kw", f.base_load_p[m - 1] / 1e3},
            {"q_kvar", f.base_load_q[m - 1] / 1e3}};
    if (std::isfinite(f.envelope_lower[m - 1])) jn["env_min_kw"] = f.envelope_lower[m - 1] / 1e3;
    if (std::isfinite(f.envelope_upper[m - 1])) jn["env_max_kw"] = f.envelope_upper[m - 1] / 1e3;
    doc["nodes"].push_back(jn);
  }
  return doc.dump(2) + "\n";
}

}  // namespace doe
