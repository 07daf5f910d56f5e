#include "doe/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "doe/errors.hpp"
#include "doe/lace.hpp"
#include "doe/power_flow.hpp"
#include "doe/synth.hpp"
#include "test_util.hpp"

using namespace doe;
using doe::test::load_data_feeder;
using doe::test::rel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LpProblem make_problem(int rows, int cols) {
  LpProblem p;
  p.objective = Eigen::VectorXd::Zero(cols);
  p.row_coeffs = Eigen::MatrixXd::Zero(rows, cols);
  p.row_rhs = Eigen::VectorXd::Zero(rows);
  p.row_sense.assign(rows, RowSense::Le);
  p.lower = Eigen::VectorXd::Constant(cols, -kInf);
  p.upper = Eigen::VectorXd::Constant(cols, kInf);
  p.row_tags.assign(rows, "");
  return p;
}

// Relabels customer nodes by a permutation; the physical network is
// unchanged, only variable order differs.
Feeder permute_nodes(const Feeder& f, const std::vector<int>& perm) {
  Feeder g = f;
  auto renum = [&](int m) { return m == 0 ? 0 : perm[m - 1]; };
  for (size_t i = 0; i < f.lines.size(); ++i) {
    g.lines[i].from_node = renum(f.lines[i].from_node);
    g.lines[i].to_node = renum(f.lines[i].to_node);
  }
  for (int m = 1; m <= f.node_count; ++m) {
    const int t = perm[m - 1];
    g.base_load_p[t - 1] = f.base_load_p[m - 1];
    g.base_load_q[t - 1] = f.base_load_q[m - 1];
    g.envelope_lower[t - 1] = f.envelope_lower[m - 1];
    g.envelope_upper[t - 1] = f.envelope_upper[m - 1];
    g.node_labels[t - 1] = f.node_labels[m - 1];
  }
  return g;
}

}  // namespace

TEST_CASE("simplex solves toy problems") {
  SUBCASE("unique vertex") {
    // max 3x + 2y st x + y <= 4, x <= 2, x,y >= 0
    LpProblem p = make_problem(2, 2);
    p.objective << 3.0, 2.0;
    p.row_coeffs << 1.0, 1.0, 1.0, 0.0;
    p.row_rhs << 4.0, 2.0;
    p.lower.setZero();
    LpSolution s = solve_simplex(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == rel(2.0));
    CHECK(s.x[1] == rel(2.0));
    CHECK(s.objective == rel(10.0));
    CHECK(s.row_active[0]);
    CHECK(s.row_active[1]);
    CHECK(!s.degenerate);
  }
  SUBCASE("alternative optima set the degeneracy flag") {
    // max x + y st x + y <= 1: every point on the facet is optimal.
    LpProblem p = make_problem(1, 2);
    p.objective << 1.0, 1.0;
    p.row_coeffs << 1.0, 1.0;
    p.row_rhs << 1.0;
    p.lower.setZero();
    p.upper << 1.0, 1.0;
    LpSolution s = solve_simplex(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == rel(1.0));
    CHECK(s.degenerate);
  }
  SUBCASE("infeasible") {
    LpProblem p = make_problem(1, 1);
    p.objective << 1.0;
    p.row_coeffs << 1.0;
    p.row_rhs << -1.0;
    p.lower << 0.0;
    LpSolution s = solve_simplex(p);
    CHECK(s.status == LpStatus::Infeasible);
  }
  SUBCASE("unbounded") {
    LpProblem p = make_problem(1, 1);
    p.objective << 1.0;
    p.row_coeffs << -1.0;
    p.row_rhs << 1.0;
    p.lower << 0.0;
    LpSolution s = solve_simplex(p);
    CHECK(s.status == LpStatus::Unbounded);
  }
  SUBCASE("no rows clamps to the favourable bound") {
    LpProblem p = make_problem(0, 2);
    p.objective << 1.0, -1.0;
    p.lower << 0.0, -5.0;
    p.upper << 3.0, kInf;
    LpSolution s = solve_simplex(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == rel(3.0));
    CHECK(s.x[1] == rel(-5.0));
  }
  SUBCASE("ge rows go through phase 1") {
    // max -x st x >= 3, x in [0, 10]
    LpProblem p = make_problem(1, 1);
    p.objective << -1.0;
    p.row_coeffs << 1.0;
    p.row_rhs << 3.0;
    p.row_sense[0] = RowSense::Ge;
    p.lower << 0.0;
    p.upper << 10.0;
    LpSolution s = solve_simplex(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == rel(3.0));
    CHECK(s.objective == rel(-3.0));
  }
  SUBCASE("negative variables with ge rows") {
    // max x + y st x + y >= -6, x,y in [-4, 0]
    LpProblem p = make_problem(1, 2);
    p.objective << 1.0, 1.0;
    p.row_coeffs << 1.0, 1.0;
    p.row_rhs << -6.0;
    p.row_sense[0] = RowSense::Ge;
    p.lower << -4.0, -4.0;
    p.upper << 0.0, 0.0;
    LpSolution s = solve_simplex(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == rel(0.0, 1e-12));
    CHECK(s.x[0] == rel(0.0, 1e-12));
  }
  SUBCASE("bound flips stay feasible") {
    // max x + 2y st x + y <= 10, x in [0,3], y in [0,4]; optimum (3,4).
    LpProblem p = make_problem(1, 2);
    p.objective << 1.0, 2.0;
    p.row_coeffs << 1.0, 1.0;
    p.row_rhs << 10.0;
    p.lower.setZero();
    p.upper << 3.0, 4.0;
    LpSolution s = solve_simplex(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == rel(3.0));
    CHECK(s.x[1] == rel(4.0));
    CHECK(!s.row_active[0]);
  }
}

TEST_CASE("simplex agrees with brute-force vertex enumeration on random boxes") {
  // Random 2-variable LPs with box bounds and two rows: the optimum is on a
  // vertex of the feasible polygon, which a dense scan can find.
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> rhs_d(0.5, 3.0);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    LpProblem p = make_problem(2, 2);
    p.objective << coef(gen), coef(gen);
    p.row_coeffs << coef(gen), coef(gen), coef(gen), coef(gen);
    p.row_rhs << rhs_d(gen), rhs_d(gen);
    p.lower << -1.0, -1.0;
    p.upper << 1.0, 1.0;

    LpSolution s = solve_simplex(p);
    if (s.status != LpStatus::Optimal) continue;
    ++solved;

    double best = -kInf;
    const int grid = 120;
    for (int i = 0; i <= grid; ++i) {
      for (int j = 0; j <= grid; ++j) {
        Eigen::Vector2d x(-1.0 + 2.0 * i / grid, -1.0 + 2.0 * j / grid);
        if ((p.row_coeffs * x - p.row_rhs).maxCoeff() > 1e-12) continue;
        best = std::max(best, p.objective.dot(x));
      }
    }
    CAPTURE(trial);
    // Grid is coarse: the true optimum can only be better.
    CHECK(s.objective >= best - 1e-9);
    CHECK((p.row_coeffs * s.x - p.row_rhs).maxCoeff() <= 1e-7);
    CHECK((s.x - p.lower).minCoeff() >= -1e-9);
    CHECK((p.upper - s.x).minCoeff() >= -1e-9);
  }
  CHECK(solved > 150);  // box keeps almost everything bounded and feasible
}

TEST_CASE("allocation lp has one thermal row plus one voltage row per node") {
  Feeder f = load_data_feeder("feeder3.json");
  LpProblem imp = assemble_lp(f, DoeCase::Import);
  REQUIRE(imp.rows() == 3);
  REQUIRE(imp.cols() == 2);
  CHECK(imp.row_tags[0] == "thermal");
  CHECK(imp.row_tags[1] == "voltage@1");
  CHECK(imp.row_tags[2] == "voltage@2");
  CHECK(imp.row_rhs[0] == rel(9995.917942265423));
  CHECK(imp.row_rhs[1] == rel(7731.0));
  CHECK(imp.row_rhs[2] == rel(6571.0));
  CHECK(imp.row_coeffs(2, 1) == rel(0.4));
  CHECK(imp.lower[0] == 0.0);
  CHECK(std::isinf(imp.upper[0]));

  LpProblem exp = assemble_lp(f, DoeCase::Export);
  CHECK(exp.row_sense[0] == RowSense::Ge);
  CHECK(exp.row_rhs[0] == rel(-29195.917942265423));
  CHECK(exp.row_rhs[2] == rel(-14589.0));
  CHECK(exp.upper[0] == 0.0);
}

TEST_CASE("lp allocation on the packaged feeders") {
  SUBCASE("20 kVA: thermal facet, alternative optima flagged") {
    Feeder f = load_data_feeder("feeder3.json");
    DoeResult imp = run_lp_doe(f, DoeCase::Import);
    CHECK(imp.combined == rel(9995.917942265423));
    CHECK(imp.degenerate);
    REQUIRE(!imp.binding.empty());
    CHECK(imp.binding[0].tag() == "thermal");
    CHECK(imp.s01_kva == rel(20.0));

    DoeResult exp = run_lp_doe(f, DoeCase::Export);
    CHECK(exp.combined == rel(-29195.917942265423));
    CHECK(exp.degenerate);
    CHECK(exp.s01_kva == rel(-20.0));
  }
  SUBCASE("100 kVA: unique voltage-limited vertex matches the greedy result") {
    Feeder f = load_data_feeder("feeder3_100kva.json");
    DoeResult imp = run_lp_doe(f, DoeCase::Import);
    CHECK(imp.envelopes[0] == rel(32855.0));
    CHECK(imp.envelopes[1] == rel(0.0, 1e-12));
    CHECK(!imp.degenerate);
    CHECK(imp.v_min_pu == rel(0.9));

    DoeResult exp = run_lp_doe(f, DoeCase::Export);
    CHECK(exp.envelopes[0] == rel(-67145.0));
    CHECK(exp.envelopes[1] == rel(0.0, 1e-12));
    CHECK(exp.v_max_pu == rel(1.1));
  }
  SUBCASE("pinned node forces the remote half of the transfer") {
    Feeder f = load_data_feeder("feeder3_100kva.json");
    f.envelope_upper[0] = 0.0;
    f.envelope_lower[0] = 0.0;
    DoeResult imp = run_lp_doe(f, DoeCase::Import);
    CHECK(imp.envelopes[1] == rel(16427.5));
    DoeResult exp = run_lp_doe(f, DoeCase::Export);
    CHECK(exp.envelopes[1] == rel(-36472.5));
  }
}

TEST_CASE("lp objective is invariant under node relabeling") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    FeederSpec spec;
    spec.seed = 1000 + trial;
    spec.node_count = 3 + trial % 8;
    spec.topology = trial % 2 ? TopologyKind::Tree : TopologyKind::Chain;
    Feeder f = generate_feeder(spec);

    std::vector<int> perm(f.node_count);
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), gen);
    Feeder g = permute_nodes(f, perm);

    for (auto c : {DoeCase::Import, DoeCase::Export}) {
      DoeResult a = run_lp_doe(f, c);
      DoeResult b = run_lp_doe(g, c);
      CAPTURE(trial);
      CHECK(std::abs(a.combined - b.combined) <=
            1e-9 * std::max(1.0, std::abs(a.combined)));
    }
  }
}

TEST_CASE("lp dominates the greedy allocation") {
  for (int trial = 0; trial < 60; ++trial) {
    FeederSpec spec;
    spec.seed = 2000 + trial;
    spec.node_count = 2 + trial % 10;
    spec.topology = trial % 3 ? TopologyKind::Chain : TopologyKind::Tree;
    Feeder f = generate_feeder(spec);
    for (auto c : {DoeCase::Import, DoeCase::Export}) {
      DoeResult greedy = run_lace(f, c);
      DoeResult lp = run_lp_doe(f, c);
      CAPTURE(trial);
      if (c == DoeCase::Import) {
        CHECK(lp.combined >= greedy.combined - 1e-6);
      } else {
        CHECK(lp.combined <= greedy.combined + 1e-6);
      }
    }
  }
}
