#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "nhsteer/homogeneous.hpp"
#include "nhsteer/planner.hpp"
#include "nhsteer/system_spec.hpp"

using namespace nhsteer;

namespace {

std::vector<ExprField> canonical_expr(int m, int r) {
  std::vector<ExprField> out;
  for (const auto& d : canonical_fields(m, r).fields) out.push_back(from_poly_field(d));
  return out;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

std::vector<double> replay(const std::vector<ExprField>& f, const std::vector<double>& x0, const ControlLaw& law) {
  IntegratorOptions o;
  o.tolerance = 1e-12;
  o.record = false;
  return integrate_endpoint(DriftlessSystem(f), x0, law, o);
}

}  // namespace

TEST_CASE("admissible interval for R", "[planner]") {
  CHECK(r_lower_bound(2) == Catch::Approx(std::pow(0.5, 1.0 / 9)));
  PlannerConfig cfg;
  double R = resolve_R(cfg, 2);
  CHECK(R > r_lower_bound(2));
  CHECK(R < 1);
  cfg.R = 0.5;
  CHECK_THROWS_AS(resolve_R(cfg, 2), Error);
  cfg.R = 0.99;
  CHECK(resolve_R(cfg, 2) == 0.99);
}

TEST_CASE("subgoals shrink along dilations", "[planner]") {
  FreeSystem sys = FreeSystem::make(canonical_expr(2, 2), 2);
  PrivilegedChart chart = sys.chart_at({0, 0, 0});
  std::vector<double> xbar{0, 0, 1};  // pseudo-norm 1
  auto half = subgoal(xbar, 0.5, 1, chart);
  CHECK(max_diff(half, {0, 0, 0.25}) <= 1e-15);
  CHECK(subgoal(xbar, 0.5, 2, chart) == chart.anchor_value);
  CHECK(subgoal(xbar, 0.9, 5, chart) == chart.anchor_value);
  CHECK(subgoal(xbar, 0.0, 3, chart) == xbar);
  CHECK(subgoal({0, 0, 0}, 0.3, 1, chart) == chart.anchor_value);
  auto q = subgoal({0.6, 0, 0}, 0.2, 1, chart);
  CHECK(max_diff(q, {0.4, 0, 0}) <= 1e-15);
}

TEST_CASE("trivial and nilpotent planning", "[planner]") {
  FreeSystem s2 = FreeSystem::make(canonical_expr(2, 2), 2);
  PlannerConfig cfg;
  PlannerReport same = global_free({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}, s2, cfg);
  CHECK(same.converged());
  CHECK(same.loops == 0);
  CHECK(same.law().empty());

  // On the canonical system the approximation is exact: one step suffices.
  PlannerReport one = global_free({0.3, -0.2, 0.5}, {0, 0, 0}, s2, cfg);
  CHECK(one.converged());
  CHECK(one.loops == 1);
  CHECK(one.z_norms.back() <= cfg.tolerance);

  FreeSystem s3 = FreeSystem::make(canonical_expr(2, 3), 3);
  PlannerReport p3 = global_free({0.2, 0.1, -0.1, 0.05, 0.02}, {0, 0, 0, 0, 0}, s3, cfg);
  CHECK(p3.converged());
  CHECK(p3.loops <= 2);
  CHECK(max_diff(replay(canonical_expr(2, 3), {0.2, 0.1, -0.1, 0.05, 0.02}, p3.law()), p3.final_point()) <= 1e-9);
}

TEST_CASE("unicycle sideways parking", "[planner]") {
  SystemSpec uni = benchmark_system("unicycle");
  FreeSystem sys = FreeSystem::make(uni.parsed, 2);
  std::vector<double> x0{0, 0, 0}, x1{0, 1, 0};
  for (bool modified : {false, true}) {
    PlannerConfig cfg;
    cfg.modified = modified;
    PlannerReport rep = global_free(x0, x1, sys, cfg);
    REQUIRE(rep.converged());
    CHECK(rep.z_norms.back() <= cfg.tolerance);
    CHECK(rep.iterates.size() == rep.inputs.size() + 1);
    CHECK(rep.subgoals.size() == rep.inputs.size());
    CHECK(rep.total_length > 0);
    CHECK(max_diff(replay(uni.parsed, x0, rep.law()), rep.final_point()) <= 1e-8);
    CHECK(max_diff(rep.final_point(), x1) <= 0.05);
    if (modified)
      for (double z : rep.z_norms) CHECK(z <= rep.k_bound);
  }
}

TEST_CASE("iteration cap is reported", "[planner]") {
  SystemSpec uni = benchmark_system("unicycle");
  FreeSystem sys = FreeSystem::make(uni.parsed, 2);
  PlannerConfig cfg;
  cfg.max_iterations = 1;
  cfg.tolerance = 1e-9;
  PlannerReport rep = global_free({0, 0, 0}, {0, 1, 0}, sys, cfg);
  CHECK(rep.status == "iteration_cap");
  try {
    require_converged(rep);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IterationCapExceeded);
  }
  CHECK_THROWS_AS(FreeSystem::make(benchmark_system("martinet").parsed, 3), Error);
}

TEST_CASE("box grids", "[planner]") {
  BoxGrid g{{-1, -1}, {1, 1}, 4};
  CHECK(g.count() == 16);
  for (std::size_t f = 0; f < g.count(); ++f) CHECK(g.flat_of(g.cell_of(f)) == f);
  CHECK(g.boxes_containing({0.1, 0.1}).size() == 1);
  CHECK(g.boxes_containing({0.0, 0.1}).size() == 2);
  CHECK(g.boxes_containing({0.0, 0.0}).size() == 4);
  CHECK(g.boxes_containing({2.0, 0.0}).empty());
  CHECK(g.center(0) == std::vector<double>{-0.75, -0.75});
}

TEST_CASE("coverings of the benchmarks", "[planner]") {
  PlannerConfig cfg;
  SystemSpec uni = benchmark_system("unicycle");
  BoxGrid gu{{-1, -1, -M_PI}, {1, 1, M_PI}, 5};
  CoveringAtlas au = build_covering(uni.parsed, gu, 2, {0, 0, 0}, {0, 1, 0}, cfg);
  CHECK(au.cells.size() == 1);
  CHECK(au.path == std::vector<int>{0});
  CHECK(au.waypoints.empty());

  SystemSpec mart = benchmark_system("martinet");
  BoxGrid gm{{-1, -1, -1}, {1, 1, 1}, 9};
  CoveringAtlas am = build_covering(mart.parsed, gm, 3, {-0.5, 0, 0}, {0.5, 0.2, 0.1}, cfg);
  REQUIRE(am.cells.size() == 3);
  CHECK(am.cells[static_cast<std::size_t>(am.path.front())].frame == std::vector<int>{1, 2, 3});
  CHECK(am.path.size() == 3);  // two edges
  std::set<std::vector<int>> frames;
  for (const auto& c : am.cells) frames.insert(c.frame);
  CHECK(frames == std::set<std::vector<int>>{{1, 2, 3}, {1, 2, 4}});
  REQUIRE(am.waypoints.size() == 2);
  for (std::size_t w = 0; w < 2; ++w) {
    CHECK(am.cells[static_cast<std::size_t>(am.path[w])].contains(gm, am.waypoints[w]));
    CHECK(am.cells[static_cast<std::size_t>(am.path[w + 1])].contains(gm, am.waypoints[w]));
  }

  BoxGrid gc{{-1, -1, -1, -1, -1}, {1, 1, 1, 1, 1}, 3};
  CoveringAtlas ac = build_covering(canonical_expr(2, 3), gc, 3, std::vector<double>(5, 0.1),
                                    std::vector<double>(5, -0.1), cfg);
  CHECK(ac.cells.size() == 1);

  std::vector<ExprField> flat{{Expr(1), Expr(0), Expr(0)}, {Expr(0), Expr(1), Expr(0)}};
  try {
    build_covering(flat, gm, 3, {0, 0, 0}, {0.1, 0, 0}, cfg);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CoverageGap);
  }
}

TEST_CASE("Martinet plan across the singular locus", "[planner]") {
  SystemSpec mart = benchmark_system("martinet");
  BoxGrid g{{-1, -1, -1}, {1, 1, 1}, 9};
  std::vector<double> from{-0.5, 0, 0}, to{0.5, 0.2, 0.1};
  PlannerConfig cfg;
  GlobalResult res = global_plan(mart.parsed, 3, from, to, g, cfg);
  REQUIRE(res.report.converged());
  CHECK(res.report.legs.size() == 3);
  CHECK(res.report.final_residual <= cfg.tolerance);
  CHECK(res.report.replay_error <= 1e-8);
  CHECK(max_diff(replay(mart.parsed, from, res.law), res.report.final_point) <= 1e-8);
  CHECK(res.report.legs[1].lifted_dim == 5);
}

TEST_CASE("degree of nonholonomy", "[planner]") {
  CHECK(nonholonomy_degree(benchmark_system("unicycle").parsed, {0, 0, 0.3}) == 2);
  CHECK(nonholonomy_degree(benchmark_system("martinet").parsed, {0.5, 0, 0}) == 2);
  CHECK(nonholonomy_degree(benchmark_system("martinet").parsed, {0, 0.5, 0}) == 3);
  CHECK(nonholonomy_degree(benchmark_system("chained4").parsed, {0.1, 0.2, 0.3, 0.4}) == 3);
}
