#include <doctest.h>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>

#include "dhplan/external.hpp"
#include "dhplan/errors.hpp"
#include "dhplan/solver.hpp"
#include "toy_models.hpp"

using namespace dhplan;
namespace fs = std::filesystem;

namespace {

fs::path make_temp_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() /
                 (std::string("dhplan_test_") + tag + "_" +
                  std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

MilpModel knapsack() {
  toy::ModelSpec s;
  const int a = s.bin("a");
  const int b = s.bin("b");
  s.row("cap", Sense::LE, 1.0, {{a, 1.0}, {b, 1.0}});
  s.cost({{a, -3.0}, {b, -2.0}});
  return std::move(s.model);
}

}  // namespace

TEST_CASE("adapter config: placeholders are mandatory") {
  SolverAdapterConfig cfg;
  cfg.command_template = "solver {model_path}";
  CHECK_THROWS_AS(cfg.check(), Error);
  cfg.command_template = "solver {solution_path}";
  CHECK_THROWS_AS(cfg.check(), Error);
  cfg.command_template = "solver {model_path} {solution_path}";
  CHECK_NOTHROW(cfg.check());
}

TEST_CASE("parse_solution_file: values, objective line and comments") {
  const fs::path dir = make_temp_dir("sol");
  const fs::path p = dir / "a.sol";
  std::ofstream(p) << "# comment\n=obj= -3.5\nx 1\ny 2.25\n\n";
  const ParsedSolution sol = parse_solution_file(p);
  CHECK(sol.has_objective);
  CHECK(sol.objective == -3.5);
  CHECK(sol.values.at("x") == 1.0);
  CHECK(sol.values.at("y") == 2.25);
}

TEST_CASE("parse_solution_file: malformed value names the line") {
  const fs::path dir = make_temp_dir("badsol");
  const fs::path p = dir / "b.sol";
  std::ofstream(p) << "x 1\ny abc\n";
  try {
    parse_solution_file(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("run_external: fixture adapter replays a pre-baked solution") {
  const fs::path dir = make_temp_dir("fixture");
  const fs::path baked = dir / "baked.sol";
  std::ofstream(baked) << "=obj= -3\na 1\nb 0\n";

  SolverAdapterConfig adapter;
  adapter.command_template =
      "test -f {model_path} && cp " + baked.string() + " {solution_path}";
  adapter.working_dir = dir;

  MilpModel m = knapsack();
  SolveConfig cfg;
  const SolveResult res = run_external(m, {}, adapter, cfg);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective_value == doctest::Approx(-3.0));
  CHECK(res.assignment[0] == 1.0);
  CHECK(res.assignment[1] == 0.0);
}

TEST_CASE("run_external: omitted variable is reported by name") {
  const fs::path dir = make_temp_dir("omit");
  const fs::path baked = dir / "baked.sol";
  std::ofstream(baked) << "a 1\n";
  SolverAdapterConfig adapter;
  adapter.command_template =
      "test -f {model_path} && cp " + baked.string() + " {solution_path}";
  adapter.working_dir = dir;
  MilpModel m = knapsack();
  SolveConfig cfg;
  try {
    run_external(m, {}, adapter, cfg);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
}

TEST_CASE("run_external: nonzero exit carries captured output") {
  const fs::path dir = make_temp_dir("fail");
  SolverAdapterConfig adapter;
  adapter.command_template =
      "echo boom-diagnostic && test -f {model_path} && false # {solution_path}";
  adapter.working_dir = dir;
  MilpModel m = knapsack();
  SolveConfig cfg;
  try {
    run_external(m, {}, adapter, cfg);
    FAIL("expected SolverFailure");
  } catch (const SolverFailure& e) {
    CHECK(std::string(e.what()).find("boom-diagnostic") != std::string::npos);
  }
}

TEST_CASE("run_external: infeasible claims are downgraded, never optimal") {
  // baked values violate the knapsack row: a + b = 2 > 1
  const fs::path dir = make_temp_dir("downgrade");
  const fs::path baked = dir / "baked.sol";
  std::ofstream(baked) << "a 1\nb 1\n";
  SolverAdapterConfig adapter;
  adapter.command_template =
      "test -f {model_path} && cp " + baked.string() + " {solution_path}";
  adapter.working_dir = dir;
  MilpModel m = knapsack();
  SolveConfig cfg;
  CHECK_THROWS_AS(run_external(m, {}, adapter, cfg), SolverFailure);
}

TEST_CASE("run_external: objective disagreement is refused") {
  const fs::path dir = make_temp_dir("objlie");
  const fs::path baked = dir / "baked.sol";
  std::ofstream(baked) << "=obj= -99\na 1\nb 0\n";
  SolverAdapterConfig adapter;
  adapter.command_template =
      "test -f {model_path} && cp " + baked.string() + " {solution_path}";
  adapter.working_dir = dir;
  MilpModel m = knapsack();
  SolveConfig cfg;
  CHECK_THROWS_AS(run_external(m, {}, adapter, cfg), SolverFailure);
}

TEST_CASE("run_external: placeholder substitution reaches the command") {
  // the command writes its arguments into the solution file itself
  const fs::path dir = make_temp_dir("subst");
  SolverAdapterConfig adapter;
  adapter.command_template =
      "test -f {model_path} && printf 'a 1\\nb 0\\n# gap {rel_gap}\\n' > "
      "{solution_path}";
  adapter.working_dir = dir;
  MilpModel m = knapsack();
  SolveConfig cfg;
  cfg.rel_gap = 0.125;
  const SolveResult res = run_external(m, {}, adapter, cfg);
  CHECK(res.status == SolveStatus::Optimal);
}

TEST_CASE("run_external: DHPLAN_WORKDIR steers the scratch directory") {
  const fs::path dir = make_temp_dir("envdir");
  ::setenv("DHPLAN_WORKDIR", dir.c_str(), 1);
  SolverAdapterConfig adapter;  // no working_dir: env must win
  adapter.command_template =
      "test -f {model_path} && printf 'a 1\\nb 0\\n' > {solution_path}";
  MilpModel m = knapsack();
  SolveConfig cfg;
  const SolveResult res = run_external(m, {}, adapter, cfg);
  ::unsetenv("DHPLAN_WORKDIR");
  CHECK(res.status == SolveStatus::Optimal);
  bool wrote_here = false;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".mps") wrote_here = true;
  CHECK(wrote_here);
}

#ifdef DHPLAN_CLI_PATH
TEST_CASE("run_external: the bundled CLI acts as a real external solver") {
  const fs::path dir = make_temp_dir("cli");
  SolverAdapterConfig adapter;
  adapter.command_template = std::string(DHPLAN_CLI_PATH) +
                             " solve-mps {model_path} --sol {solution_path} "
                             "--gap {rel_gap} > /dev/null";
  adapter.working_dir = dir;

  for (int variant = 0; variant < 5; ++variant) {
    auto [sys, scn] = toy::unit_market_edge(2 + variant % 3, 4.0 + variant);
    if (variant % 2 == 0) sys.units[0].startup_cost = 17.0;
    MilpModel m = assemble(sys, scn);
    SolveConfig cfg;
    cfg.rel_gap = 0.0;
    const SolveResult ext = run_external(m, {}, adapter, cfg);
    const SolveResult ours = brute_force(m, {}, cfg);
    REQUIRE(ext.status == SolveStatus::Optimal);
    REQUIRE(ours.status == SolveStatus::Optimal);
    CHECK(ext.objective_value ==
          doctest::Approx(ours.objective_value)
              .epsilon(1e-6));
  }
}
#endif
