#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "dhplan/solver.hpp"
#include "toy_models.hpp"

using namespace dhplan;

namespace {

SolveResult lp(const MilpModel& m, Objective obj = Objective::Cost) {
  SolveConfig cfg;
  SolveRequest req;
  req.objective = obj;
  return solve_lp(m, req, cfg);
}

}  // namespace

TEST_CASE("solve_lp: bound-only LP") {
  toy::ModelSpec s;
  const int x = s.cont("x", 3.0, kInf);
  s.row("r", Sense::GE, 3.0, {{x, 1.0}});
  s.cost({{x, 1.0}});
  SolveResult res = lp(s.model);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective_value == doctest::Approx(3.0));
}

TEST_CASE("solve_lp: single-row LP") {
  toy::ModelSpec s;
  const int x = s.cont("x", 0.0, kInf);
  const int y = s.cont("y", 0.0, kInf);
  s.row("cap", Sense::LE, 1.0, {{x, 1.0}, {y, 1.0}});
  s.cost({{x, -1.0}, {y, -1.0}});  // maximize x+y
  SolveResult res = lp(s.model);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective_value == doctest::Approx(-1.0));
}

TEST_CASE("solve_lp: equality system with negative bounds") {
  toy::ModelSpec s;
  const int x = s.cont("x", -5.0, 5.0);
  const int y = s.cont("y", -5.0, 5.0);
  s.row("r1", Sense::EQ, 1.0, {{x, 1.0}, {y, 1.0}});
  s.row("r2", Sense::EQ, 3.0, {{x, 1.0}, {y, -1.0}});
  s.cost({{x, 1.0}, {y, 10.0}});
  SolveResult res = lp(s.model);
  REQUIRE(res.status == SolveStatus::Optimal);
  // unique point: x = 2, y = -1
  CHECK(res.assignment[0] == doctest::Approx(2.0));
  CHECK(res.assignment[1] == doctest::Approx(-1.0));
}

TEST_CASE("solve_lp: infeasible row pair") {
  toy::ModelSpec s;
  const int x = s.cont("x", 0.0, kInf);
  s.row("lo", Sense::GE, 5.0, {{x, 1.0}});
  s.row("hi", Sense::LE, 4.0, {{x, 1.0}});
  s.cost({{x, 1.0}});
  CHECK(lp(s.model).status == SolveStatus::Infeasible);
}

TEST_CASE("solve_lp: unbounded ray") {
  toy::ModelSpec s;
  const int x = s.cont("x", 0.0, kInf);
  const int y = s.cont("y", 0.0, kInf);
  s.row("r", Sense::GE, 1.0, {{x, 1.0}, {y, 1.0}});
  s.cost({{x, -1.0}});
  CHECK(lp(s.model).status == SolveStatus::Unbounded);
}

TEST_CASE("solve_lp: free variables") {
  toy::ModelSpec s;
  const int x = s.cont("x", -kInf, kInf);
  const int y = s.cont("y", -kInf, kInf);
  s.row("r1", Sense::EQ, 4.0, {{x, 2.0}, {y, 1.0}});
  s.row("r2", Sense::GE, -1.0, {{y, 1.0}});
  s.cost({{y, 1.0}});
  SolveResult res = lp(s.model);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective_value == doctest::Approx(-1.0));
  CHECK(res.assignment[0] == doctest::Approx(2.5));
}

TEST_CASE("solve_lp: degenerate vertex does not cycle") {
  // classic degeneracy: multiple rows meet at the optimum
  toy::ModelSpec s;
  const int x = s.cont("x", 0.0, kInf);
  const int y = s.cont("y", 0.0, kInf);
  const int z = s.cont("z", 0.0, kInf);
  s.row("r1", Sense::LE, 1.0, {{x, 1.0}, {y, 1.0}});
  s.row("r2", Sense::LE, 1.0, {{x, 1.0}, {z, 1.0}});
  s.row("r3", Sense::LE, 1.0, {{y, 1.0}, {z, 1.0}});
  s.row("r4", Sense::LE, 1.5, {{x, 1.0}, {y, 1.0}, {z, 1.0}});
  s.cost({{x, -1.0}, {y, -1.0}, {z, -1.0}});
  SolveResult res = lp(s.model);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective_value == doctest::Approx(-1.5));
}

TEST_CASE("solve_lp: relaxation bounds the PWL integer model") {
  auto [sys, scn] = toy::unit_market_edge(1, 5.5);
  sys.units[0].conversions[0].curve = PwlCurve{{{0, 0}, {5, 4}, {10, 7}}};
  sys.units[0].output_bounds["heat"] = {0.0, 7.0};
  MilpModel m = assemble(sys, scn);
  SolveConfig cfg;
  cfg.rel_gap = 0.0;
  const SolveResult relax = solve_lp(m, {}, cfg);
  const SolveResult integer = branch_and_bound(m, {}, cfg);
  REQUIRE(relax.status == SolveStatus::Optimal);
  REQUIRE(integer.status == SolveStatus::Optimal);
  CHECK(relax.objective_value <=
        integer.objective_value + 1e-9 * std::abs(integer.objective_value) + 1e-9);
}

TEST_CASE("solve_lp: frozen scipy fixtures agree") {
  std::ifstream in(std::string(DHPLAN_TEST_DATA_DIR) + "/lp_fixtures.json");
  REQUIRE(in.good());
  nlohmann::json doc = nlohmann::json::parse(in);

  int checked = 0;
  for (const auto& f : doc.at("fixtures")) {
    CAPTURE(f.at("name").get<std::string>());
    toy::ModelSpec s;
    const auto& lo = f.at("lo");
    const auto& hi = f.at("hi");
    const auto& cost = f.at("cost");
    const size_t n = cost.size();
    std::vector<LinTerm> obj;
    for (size_t j = 0; j < n; ++j) {
      const double l = lo[j].is_null() ? -kInf : lo[j].get<double>();
      const double h = hi[j].is_null() ? kInf : hi[j].get<double>();
      const int v = s.cont("x" + std::to_string(j), l, h);
      if (cost[j].get<double>() != 0.0) obj.push_back({v, cost[j].get<double>()});
    }
    s.cost(std::move(obj));
    int ri = 0;
    for (const auto& row : f.at("rows")) {
      std::vector<LinTerm> terms;
      const auto& coefs = row.at("coefs");
      for (size_t j = 0; j < n; ++j)
        if (coefs[j].get<double>() != 0.0)
          terms.push_back({static_cast<int>(j), coefs[j].get<double>()});
      const std::string sense = row.at("sense").get<std::string>();
      s.row("r" + std::to_string(ri++),
            sense == "le" ? Sense::LE : sense == "ge" ? Sense::GE : Sense::EQ,
            row.at("rhs").get<double>(), std::move(terms));
    }

    SolveResult res = lp(s.model);
    const std::string expect = f.at("status").get<std::string>();
    if (expect == "optimal") {
      REQUIRE(res.status == SolveStatus::Optimal);
      const double want = f.at("objective").get<double>();
      CHECK(res.objective_value ==
            doctest::Approx(want).epsilon(1e-6).scale(std::max(1.0, std::abs(want))));
      // every reported optimum must audit cleanly
      const AuditReport audit = audit_solution(s.model, res.assignment);
      CHECK(audit.max_row_residual <= 1e-6);
    } else if (expect == "infeasible") {
      CHECK(res.status == SolveStatus::Infeasible);
    } else {
      CHECK(res.status == SolveStatus::Unbounded);
    }
    ++checked;
  }
  CHECK(checked == 28);
}
