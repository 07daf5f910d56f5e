#include "doe/synth.hpp"

#include <sstream>

#include "doctest.h"
#include "doe/errors.hpp"
#include "doe/power_flow.hpp"
#include "test_util.hpp"

using namespace doe;
using doe::test::load_data_feeder;
using doe::test::rel;

TEST_CASE("same spec, same feeder; new seed, new feeder") {
  FeederSpec spec;
  spec.node_count = 15;
  spec.topology = TopologyKind::Tree;
  spec.branching = 2.5;
  spec.seed = 42;

  Feeder a = generate_feeder(spec);
  Feeder b = generate_feeder(spec);
  REQUIRE(a.lines.size() == b.lines.size());
  for (size_t i = 0; i < a.lines.size(); ++i) {
    CHECK(a.lines[i].from_node == b.lines[i].from_node);
    CHECK(a.lines[i].resistance == b.lines[i].resistance);
  }
  CHECK((a.base_load_p - b.base_load_p).cwiseAbs().maxCoeff() == 0.0);

  spec.seed = 43;
  Feeder d = generate_feeder(spec);
  CHECK((a.base_load_p - d.base_load_p).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("degenerate ranges reproduce the packaged three-node feeder") {
  FeederSpec spec;
  spec.node_count = 2;
  spec.topology = TopologyKind::Chain;
  spec.r_min_ohm = 0.1;
  spec.r_max_ohm = 0.1;
  spec.x_over_r = 0.5;
  spec.load_p_min_kw = 4.8;
  spec.load_p_max_kw = 4.8;
  spec.q_over_p = 2.0 / 4.8;
  spec.fixed_transformer_kva = 20.0;

  Feeder g = generate_feeder(spec);
  Feeder f = load_data_feeder("feeder3.json");
  REQUIRE(g.node_count == f.node_count);
  for (size_t i = 0; i < f.lines.size(); ++i) {
    CHECK(g.lines[i].resistance == rel(f.lines[i].resistance));
    CHECK(g.lines[i].reactance == rel(f.lines[i].reactance));
  }
  for (int m = 0; m < f.node_count; ++m) {
    CHECK(g.base_load_p[m] == rel(f.base_load_p[m]));
    CHECK(g.base_load_q[m] == rel(f.base_load_q[m]));
  }
  CHECK(g.transformer_rating == rel(f.transformer_rating));
  CHECK(g.slack_voltage == rel(f.slack_voltage));
}

TEST_CASE("trees branch, chains do not") {
  FeederSpec spec;
  spec.node_count = 40;
  spec.topology = TopologyKind::Tree;
  spec.branching = 3.0;
  spec.seed = 5;
  Feeder t = generate_feeder(spec);
  TopologyReport tree_rep = validate_radial(t);
  REQUIRE(tree_rep.ok());
  CHECK(tree_rep.lateral_count >= 1);
  CHECK(tree_rep.max_depth < 40);

  spec.topology = TopologyKind::Chain;
  Feeder c = generate_feeder(spec);
  TopologyReport chain_rep = validate_radial(c);
  REQUIRE(chain_rep.ok());
  CHECK(chain_rep.lateral_count == 0);
  CHECK(chain_rep.max_depth == 40);
}

TEST_CASE("deep chains are scaled onto the voltage-band budget") {
  FeederSpec spec;
  spec.node_count = 200;
  spec.seed = 9;
  Feeder f = generate_feeder(spec);

  const double budget = spec.voltage_band_use * (f.u0() - f.u_min());
  BranchFlowState st = solve_linear(f, Eigen::VectorXd::Zero(200));
  CHECK(f.u0() - st.u.minCoeff() == rel(budget));
  CHECK_NOTHROW(spare_capacity(f));
}

TEST_CASE("unusable specs are rejected") {
  FeederSpec spec;
  SUBCASE("margin at or below one") {
    spec.transformer_margin = 1.0;
    CHECK_THROWS_AS(generate_feeder(spec), ValidationError);
  }
  SUBCASE("band share out of range") {
    spec.voltage_band_use = 1.0;
    CHECK_THROWS_AS(generate_feeder(spec), ValidationError);
  }
  SUBCASE("zero minimum resistance") {
    spec.r_min_ohm = 0.0;
    CHECK_THROWS_AS(generate_feeder(spec), ValidationError);
  }
  SUBCASE("fixed rating below the base load") {
    spec.node_count = 3;
    spec.fixed_transformer_kva = 0.001;
    CHECK_THROWS_AS(generate_feeder(spec), ValidationError);
  }
}

TEST_CASE("benchmark covers every spec, engine and case") {
  std::vector<FeederSpec> specs(2);
  specs[0].node_count = 4;
  specs[0].seed = 1;
  specs[1].node_count = 6;
  specs[1].topology = TopologyKind::Tree;
  specs[1].seed = 2;

  BenchReport rep = run_benchmark(specs, {"lace", "lp"}, 3);
  REQUIRE(rep.cells.size() == 8);
  CHECK(rep.cells[0].feeder_id == "chain-n4-s1");
  for (const auto& cell : rep.cells) {
    CHECK(cell.status == "ok");
    CHECK(cell.time_ms >= 0.0);
  }

  std::string csv = bench_to_csv(rep);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "feeder_id,n_nodes,topology,engine,case,time_ms,combined_kw,status");
  int rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 8);
}

TEST_CASE("benchmarking a packaged feeder detects its topology kind") {
  Feeder f = load_data_feeder("feeder8_belgian.json");
  BenchReport rep = run_benchmark(f, "belgian", {"lace"}, 1);
  REQUIRE(rep.cells.size() == 2);
  CHECK(rep.cells[0].topology == TopologyKind::Tree);
  CHECK(rep.cells[0].feeder_id == "belgian");
}
