#include "doe/feeder.hpp"

#include <cmath>
#include <string>

#include "doctest.h"
#include "doe/errors.hpp"
#include "test_util.hpp"

using namespace doe;
using doe::test::chain_feeder;
using doe::test::load_data_feeder;
using doe::test::rel;

namespace {

bool throws_with(const std::string& doc, const std::string& needle) {
  try {
    load_feeder(doc);
  } catch (const ValidationError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("packaged three-node feeder loads with SI conversion") {
  Feeder f = load_data_feeder("feeder3.json");
  CHECK(f.node_count == 2);
  CHECK(f.base_voltage == rel(230.0));
  CHECK(f.slack_voltage == rel(230.0));
  CHECK(f.voltage_min == rel(207.0));
  CHECK(f.voltage_max == rel(253.0));
  CHECK(f.transformer_rating == rel(20000.0));
  CHECK(f.u0() == rel(52900.0));

  REQUIRE(f.lines.size() == 2);
  CHECK(f.lines[0].from_node == 0);
  CHECK(f.lines[0].to_node == 1);
  CHECK(f.lines[0].resistance == rel(0.1));
  CHECK(f.lines[0].reactance == rel(0.05));
  CHECK(f.lines[1].from_node == 1);
  CHECK(f.lines[1].to_node == 2);

  CHECK(f.base_load_p[0] == rel(4800.0));
  CHECK(f.base_load_q[1] == rel(2000.0));
  CHECK(f.node_labels == std::vector<std::int64_t>{1, 2});
  CHECK(!std::isfinite(f.envelope_lower[0]));
  CHECK(!std::isfinite(f.envelope_upper[1]));
}

TEST_CASE("arbitrary labels renumber breadth-first from the slack") {
  const std::string doc = R"({
    "base_voltage_kv": 0.23, "slack_voltage_pu": 1.0,
    "v_min_pu": 0.9, "v_max_pu": 1.1, "transformer_kva": 50,
    "nodes": [
      {"id": 13, "p_kw": 3.0, "q_kvar": 1.0},
      {"id": 42, "p_kw": 1.0, "q_kvar": 0.5},
      {"id": 7,  "p_kw": 2.0, "q_kvar": 0.7, "env_max_kw": 4.0}
    ],
    "lines": [
      {"from": 42, "to": 13, "r_ohm": 0.05, "x_ohm": 0.02},
      {"from": 100, "to": 42, "r_ohm": 0.04, "x_ohm": 0.02},
      {"from": 42, "to": 7, "r_ohm": 0.06, "x_ohm": 0.03}
    ]
  })";
  Feeder f = load_feeder(doc);
  CHECK(f.node_count == 3);
  // slack = 100; its child 42 becomes node 1, 42's children sorted by label.
  CHECK(f.node_labels == std::vector<std::int64_t>{42, 7, 13});
  CHECK(f.base_load_p[0] == rel(1000.0));
  CHECK(f.base_load_p[1] == rel(2000.0));
  CHECK(f.base_load_p[2] == rel(3000.0));
  CHECK(f.envelope_upper[1] == rel(4000.0));

  Topology topo(f);
  CHECK(topo.parent[1] == 0);
  CHECK(topo.parent[2] == 1);
  CHECK(topo.parent[3] == 1);
  CHECK(topo.depth[3] == 2);
  CHECK(topo.path_r[2] == rel(0.04 + 0.06));
}

TEST_CASE("schema violations are rejected with a pointed message") {
  const std::string ok_head = R"("base_voltage_kv": 0.23, "slack_voltage_pu": 1.0,
    "v_min_pu": 0.9, "v_max_pu": 1.1, "transformer_kva": 50,)";

  CHECK(throws_with("{not json", "feeder schema"));
  CHECK(throws_with(R"({"base_voltage_kv": 0.23})", "slack_voltage_pu"));
  CHECK(throws_with(
      R"({"base_voltage_kv": 0.23, "slack_voltage_pu": 0.85,
          "v_min_pu": 0.9, "v_max_pu": 1.1, "transformer_kva": 50,
          "nodes": [{"id": 1, "p_kw": 1, "q_kvar": 0}],
          "lines": [{"from": 0, "to": 1, "r_ohm": 0.1, "x_ohm": 0.05}]})",
      "v_min_pu < slack_voltage_pu < v_max_pu"));
  CHECK(throws_with("{" + ok_head + R"(
      "nodes": [{"id": 1, "p_kw": 1, "q_kvar": 0}, {"id": 1, "p_kw": 2, "q_kvar": 0}],
      "lines": [{"from": 0, "to": 1, "r_ohm": 0.1, "x_ohm": 0.05}]})",
                    "duplicate node id 1"));
  CHECK(throws_with("{" + ok_head + R"(
      "nodes": [{"id": 1, "p_kw": 1, "q_kvar": 0, "env_min_kw": 2.0}],
      "lines": [{"from": 0, "to": 1, "r_ohm": 0.1, "x_ohm": 0.05}]})",
                    "env_min_kw <= 0 <= env_max_kw"));
  CHECK(throws_with("{" + ok_head + R"(
      "nodes": [{"id": 1, "p_kw": 1, "q_kvar": 0}],
      "lines": [{"from": 0, "to": 1, "r_ohm": -0.1, "x_ohm": 0.05}]})",
                    "non-negative"));
}

TEST_CASE("broken topologies are rejected") {
  const std::string head = R"("base_voltage_kv": 0.23, "slack_voltage_pu": 1.0,
    "v_min_pu": 0.9, "v_max_pu": 1.1, "transformer_kva": 50,)";
  auto two_nodes = R"("nodes": [{"id": 1, "p_kw": 1, "q_kvar": 0},
                                {"id": 2, "p_kw": 1, "q_kvar": 0}],)";

  SUBCASE("two slack candidates") {
    CHECK(throws_with("{" + head + two_nodes + R"(
        "lines": [{"from": 0, "to": 1, "r_ohm": 0.1, "x_ohm": 0.05},
                  {"from": 9, "to": 2, "r_ohm": 0.1, "x_ohm": 0.05}]})",
                      "exactly one slack"));
  }
  SUBCASE("node fed twice") {
    CHECK(throws_with("{" + head + two_nodes + R"(
        "lines": [{"from": 0, "to": 1, "r_ohm": 0.1, "x_ohm": 0.05},
                  {"from": 0, "to": 2, "r_ohm": 0.1, "x_ohm": 0.05},
                  {"from": 1, "to": 2, "r_ohm": 0.1, "x_ohm": 0.05}]})",
                      "more than one line"));
  }
  SUBCASE("cycle off the trunk") {
    CHECK(throws_with("{" + head + R"(
        "nodes": [{"id": 1, "p_kw": 1, "q_kvar": 0},
                  {"id": 2, "p_kw": 1, "q_kvar": 0},
                  {"id": 3, "p_kw": 1, "q_kvar": 0}],
        "lines": [{"from": 0, "to": 1, "r_ohm": 0.1, "x_ohm": 0.05},
                  {"from": 2, "to": 3, "r_ohm": 0.1, "x_ohm": 0.05},
                  {"from": 3, "to": 2, "r_ohm": 0.1, "x_ohm": 0.05}]})",
                      "unreachable"));
  }
  SUBCASE("line into undeclared node") {
    CHECK(throws_with("{" + head + two_nodes + R"(
        "lines": [{"from": 0, "to": 1, "r_ohm": 0.1, "x_ohm": 0.05},
                  {"from": 1, "to": 2, "r_ohm": 0.1, "x_ohm": 0.05},
                  {"from": 2, "to": 5, "r_ohm": 0.1, "x_ohm": 0.05}]})",
                      "undeclared node 5"));
  }
  SUBCASE("isolated declared node") {
    CHECK(throws_with("{" + head + two_nodes + R"(
        "lines": [{"from": 0, "to": 1, "r_ohm": 0.1, "x_ohm": 0.05}]})",
                      "unreachable node(s) 2"));
  }
}

TEST_CASE("validate_radial flags inconsistencies without throwing") {
  SUBCASE("disconnected line list") {
    Feeder f = chain_feeder(3, 0.1, 0.05, 1000, 300, 50000);
    f.lines[1].from_node = 3;  // 0->1, 3->2, 2->3: nodes 2,3 now a loop
    TopologyReport rep = validate_radial(f);
    CHECK(!rep.ok());
    CHECK(!rep.connected);
  }
  SUBCASE("zero-resistance path") {
    Feeder f = chain_feeder(2, 0.1, 0.05, 1000, 300, 50000);
    f.lines[0].resistance = 0.0;
    TopologyReport rep = validate_radial(f);
    CHECK(rep.connected);
    CHECK(rep.is_tree);
    REQUIRE(!rep.ok());
    bool found = false;
    for (const auto& issue : rep.issues) {
      found = found || issue.find("zero-resistance") != std::string::npos;
    }
    CHECK(found);
    CHECK_THROWS_AS(Topology{f}, ValidationError);
  }
  SUBCASE("limits and vector lengths") {
    Feeder f = chain_feeder(2, 0.1, 0.05, 1000, 300, 50000);
    f.transformer_rating = 0.0;
    f.voltage_min = f.slack_voltage;
    f.base_load_q = Eigen::VectorXd::Zero(1);
    TopologyReport rep = validate_radial(f);
    CHECK(rep.issues.size() >= 3);
  }
}

TEST_CASE("two-lateral packaged feeder reports its shape") {
  Feeder f = load_data_feeder("feeder8_belgian.json");
  TopologyReport rep = validate_radial(f);
  REQUIRE(rep.ok());
  CHECK(rep.node_count == 7);
  CHECK(rep.is_tree);
  CHECK(rep.slack_adjacent_count == 1);
  CHECK(rep.lateral_count == 2);
  CHECK(rep.max_depth == 5);

  Topology topo(f);
  CHECK(topo.path_r[7] == rel(0.02 + 0.025 + 0.03 + 0.035 + 0.04));
  // bfs_order keeps parents ahead of their children.
  std::vector<int> pos(topo.n + 1, -1);
  for (int i = 0; i < topo.n; ++i) pos[topo.bfs_order[i]] = i;
  for (int m = 1; m <= topo.n; ++m) {
    if (topo.parent[m] != 0) CHECK(pos[topo.parent[m]] < pos[m]);
  }
}

TEST_CASE("json round trip preserves the network") {
  Feeder f = load_data_feeder("feeder8_belgian.json");
  Feeder g = load_feeder(feeder_to_json(f));
  CHECK(g.node_count == f.node_count);
  CHECK(g.node_labels == f.node_labels);
  CHECK(g.transformer_rating == rel(f.transformer_rating));
  REQUIRE(g.lines.size() == f.lines.size());
  for (size_t i = 0; i < f.lines.size(); ++i) {
    CHECK(g.lines[i].from_node == f.lines[i].from_node);
    CHECK(g.lines[i].to_node == f.lines[i].to_node);
    CHECK(g.lines[i].resistance == rel(f.lines[i].resistance));
    CHECK(g.lines[i].reactance == rel(f.lines[i].reactance));
  }
  for (int m = 0; m < f.node_count; ++m) {
    CHECK(g.base_load_p[m] == rel(f.base_load_p[m]));
    CHECK(g.base_load_q[m] == rel(f.base_load_q[m]));
    CHECK(g.envelope_lower[m] == rel(f.envelope_lower[m]));
    CHECK(g.envelope_upper[m] == rel(f.envelope_upper[m]));
  }
}
