// dhplan: build, solve and sweep district-heating unit-commitment and
// investment-planning MILPs.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dhplan/backend.hpp"
#include "dhplan/errors.hpp"
#include "dhplan/milp.hpp"
#include "dhplan/mps.hpp"
#include "dhplan/pareto.hpp"
#include "dhplan/reports.hpp"
#include "dhplan/scenario_io.hpp"
#include "dhplan/solver.hpp"
#include "dhplan/synthetic.hpp"

namespace {

using namespace dhplan;

constexpr int kExitOk = 0;
constexpr int kExitDiagnostics = 1;
constexpr int kExitUsage = 2;

SolverAdapterConfig load_adapter(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open adapter config '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("adapter config '" + path + "': " + e.what());
  }
  SolverAdapterConfig cfg;
  cfg.command_template = doc.at("command_template").get<std::string>();
  if (doc.contains("working_dir"))
    cfg.working_dir = doc.at("working_dir").get<std::string>();
  cfg.check();
  return cfg;
}

LoadedScenario load_checked(const std::string& path, bool print_diags) {
  LoadedScenario loaded = load_scenario(path);
  if (!loaded.diagnostics.empty() && print_diags)
    std::cerr << format_diagnostics(loaded.diagnostics);
  return loaded;
}

std::vector<double> parse_csv_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

void print_solve_summary(const SolveResult& res) {
  std::cout << "status:        " << to_string(res.status) << "\n";
  if (res.status == SolveStatus::Optimal || res.status == SolveStatus::GapReached ||
      (res.status == SolveStatus::LimitReached && !res.assignment.empty())) {
    std::cout << "objective:     " << res.objective_value << "\n"
              << "best bound:    " << res.best_bound << "\n"
              << "rel gap:       " << res.rel_gap << "\n";
  }
  std::cout << "nodes:         " << res.node_count << "\n"
            << "lp iterations: " << res.iteration_count << "\n"
            << "wall time:     " << res.wall_time << " s\n";
}

struct SolverChoice {
  std::string name = "builtin";
  std::string adapter_path;

  std::unique_ptr<SolverBackend> make() const {
    if (name == "builtin") return std::make_unique<BuiltinBackend>();
    if (name == "external") {
      if (adapter_path.empty())
        throw Error("--solver external requires --adapter <config.json>");
      return std::make_unique<ExternalBackend>(load_adapter(adapter_path));
    }
    throw Error("unknown solver '" + name + "' (builtin|external)");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"district heating unit-commitment and investment planning"};
  app.require_subcommand(1);

  // ---- validate ----
  std::string val_scenario;
  auto* cmd_validate = app.add_subcommand("validate", "check a scenario file");
  cmd_validate->add_option("scenario", val_scenario, "scenario JSON")->required();

  // ---- build ----
  std::string build_scenario, build_mps;
  std::string build_objective = "cost";
  auto* cmd_build = app.add_subcommand("build", "assemble the MILP and export MPS");
  cmd_build->add_option("scenario", build_scenario, "scenario JSON")->required();
  cmd_build->add_option("--mps", build_mps, "output MPS path")->required();
  cmd_build->add_option("--objective", build_objective,
                        "active objective row (cost|emissions)");

  // ---- solve ----
  std::string solve_scenario;
  double solve_gap = 0.005;
  double solve_time_limit = 1e18;
  std::string solve_objective = "cost";
  SolverChoice solve_solver;
  std::int64_t solve_max_nnz = 200000;
  auto* cmd_solve = app.add_subcommand("solve", "minimize cost for a scenario");
  cmd_solve->add_option("scenario", solve_scenario, "scenario JSON")->required();
  cmd_solve->add_option("--gap", solve_gap, "relative MIP gap (default 0.005)");
  cmd_solve->add_option("--time-limit", solve_time_limit, "seconds");
  cmd_solve->add_option("--objective", solve_objective, "cost|emissions");
  cmd_solve->add_option("--solver", solve_solver.name, "builtin|external");
  cmd_solve->add_option("--adapter", solve_solver.adapter_path,
                        "external adapter config JSON");
  cmd_solve->add_option("--max-nonzeros", solve_max_nnz,
                        "built-in desk-scale guard");

  // ---- pareto ----
  std::string pareto_scenario, pareto_out = "reports";
  std::string pareto_steps, pareto_gaps;
  int pareto_jobs = 0;
  SolverChoice pareto_solver;
  double pareto_time_limit = 1e18;
  std::int64_t pareto_max_nnz = 200000;
  auto* cmd_pareto =
      app.add_subcommand("pareto", "lexicographic cost/CO2 sweep with reports");
  cmd_pareto->add_option("scenario", pareto_scenario, "scenario JSON")->required();
  cmd_pareto->add_option("--steps", pareto_steps,
                         "relaxation steps, e.g. 0.05,0.10,0.30");
  cmd_pareto->add_option("--gaps", pareto_gaps,
                         "MIP gap per step (same length as --steps)");
  cmd_pareto->add_option("--out", pareto_out, "report directory");
  cmd_pareto->add_option("--jobs", pareto_jobs,
                         "concurrent capped solves (0 = auto)");
  cmd_pareto->add_option("--solver", pareto_solver.name, "builtin|external");
  cmd_pareto->add_option("--adapter", pareto_solver.adapter_path,
                         "external adapter config JSON");
  cmd_pareto->add_option("--time-limit", pareto_time_limit,
                         "seconds per solve");
  cmd_pareto->add_option("--max-nonzeros", pareto_max_nnz,
                         "built-in desk-scale guard");

  // ---- gen ----
  int gen_regions = 1, gen_units = 1, gen_invest = 0, gen_steps = 24;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* cmd_gen = app.add_subcommand("gen", "generate a synthetic instance");
  cmd_gen->add_option("--regions", gen_regions, "demand regions")->required();
  cmd_gen->add_option("--units", gen_units, "units per region")->required();
  cmd_gen->add_option("--invest", gen_invest, "investment candidates")->required();
  cmd_gen->add_option("--steps", gen_steps, "time steps")->required();
  cmd_gen->add_option("--seed", gen_seed, "random seed")->required();
  cmd_gen->add_option("--out", gen_out, "output scenario JSON")->required();

  // ---- solve-mps ----
  std::string mps_in, mps_sol;
  double mps_gap = 0.0;
  double mps_time_limit = 1e18;
  std::int64_t mps_max_nnz = 200000;
  auto* cmd_solve_mps = app.add_subcommand(
      "solve-mps", "solve a free-format MPS file with the built-in solver");
  cmd_solve_mps->add_option("mps", mps_in, "MPS path")->required();
  cmd_solve_mps->add_option("--sol", mps_sol,
                            "write a name/value solution file here");
  cmd_solve_mps->add_option("--gap", mps_gap, "relative MIP gap");
  cmd_solve_mps->add_option("--time-limit", mps_time_limit, "seconds");
  cmd_solve_mps->add_option("--max-nonzeros", mps_max_nnz,
                            "built-in desk-scale guard");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_validate) {
      LoadedScenario loaded = load_checked(val_scenario, true);
      if (!loaded.diagnostics.empty()) return kExitDiagnostics;
      std::cout << "scenario ok: " << loaded.system.units.size() << " units, "
                << loaded.system.storages.size() << " storages, "
                << loaded.system.markets.size() << " markets, "
                << loaded.system.investments.size() << " investments, T="
                << loaded.system.time_grid.step_count << "\n";
      return kExitOk;
    }

    if (*cmd_build) {
      LoadedScenario loaded = load_checked(build_scenario, true);
      if (!loaded.diagnostics.empty()) return kExitDiagnostics;
      const MilpModel model = assemble(loaded.system, loaded.scenario);
      const Objective obj =
          build_objective == "emissions" ? Objective::Emissions : Objective::Cost;
      const auto bytes = write_mps(model, build_mps, obj);
      std::cout << "wrote " << build_mps << " (" << bytes << " bytes): "
                << model.num_variables() << " variables, "
                << model.num_constraints() << " constraints, "
                << model.num_binaries() << " binaries, " << model.num_nonzeros()
                << " nonzeros\n";
      return kExitOk;
    }

    if (*cmd_solve) {
      LoadedScenario loaded = load_checked(solve_scenario, true);
      if (!loaded.diagnostics.empty()) return kExitDiagnostics;
      const MilpModel model = assemble(loaded.system, loaded.scenario);
      SolveRequest req;
      req.objective = solve_objective == "emissions" ? Objective::Emissions
                                                     : Objective::Cost;
      SolveConfig cfg;
      cfg.rel_gap = solve_gap;
      cfg.time_limit = solve_time_limit;
      cfg.max_nonzeros = solve_max_nnz;
      const auto backend = solve_solver.make();
      const SolveResult res = backend->solve(model, req, cfg);
      print_solve_summary(res);
      return res.status == SolveStatus::Optimal ||
                     res.status == SolveStatus::GapReached
                 ? kExitOk
                 : kExitDiagnostics;
    }

    if (*cmd_pareto) {
      LoadedScenario loaded = load_checked(pareto_scenario, true);
      if (!loaded.diagnostics.empty()) return kExitDiagnostics;

      SweepConfig sweep;
      if (!pareto_steps.empty()) sweep.relaxation_steps = parse_csv_doubles(pareto_steps);
      if (!pareto_gaps.empty()) {
        const auto gaps = parse_csv_doubles(pareto_gaps);
        if (gaps.size() != sweep.relaxation_steps.size())
          throw Error("--gaps must list one gap per step");
        sweep.gap_schedule.clear();
        for (size_t i = 0; i < gaps.size(); ++i)
          sweep.gap_schedule[sweep.relaxation_steps[i]] = gaps[i];
      }
      sweep.jobs = pareto_jobs > 0
                       ? pareto_jobs
                       : static_cast<int>(std::min<unsigned>(
                             std::max(1u, std::thread::hardware_concurrency()),
                             static_cast<unsigned>(sweep.relaxation_steps.size())));
      sweep.solve.time_limit = pareto_time_limit;
      sweep.solve.max_nonzeros = pareto_max_nnz;
      sweep.check();

      const auto backend = pareto_solver.make();
      const SolutionCatalog cat =
          run_sweep(loaded.system, loaded.scenario, sweep, *backend);
      const ReportBundle bundle =
          emit_reports(cat, pareto_out, loaded.system.currency_unit,
                       loaded.system.emission_unit);

      std::cout << "anchor cost: " << cat.anchor_cost << "\n";
      std::cout << "step   cost          emissions     norm_c  norm_e\n";
      bool any_failed = false;
      for (const auto& p : cat.points) {
        if (!p.failure.empty()) {
          any_failed = true;
          std::printf("%-6g FAILED: %s\n", p.step, p.failure.c_str());
          continue;
        }
        std::printf("%-6g %-13g %-13g %-7.4f %-7.4f\n", p.step, p.cost,
                    p.emissions, p.normalized_cost, p.normalized_emissions);
      }
      std::cout << "reports: " << bundle.catalog_json.string() << ", "
                << bundle.pareto_csv.string() << ", "
                << bundle.investments_csv.string() << ", "
                << bundle.plot_csv.string() << "\n";
      return any_failed ? kExitDiagnostics : kExitOk;
    }

    if (*cmd_gen) {
      SyntheticSpec spec;
      spec.regions = gen_regions;
      spec.units_per_region = gen_units;
      spec.invest_count = gen_invest;
      spec.steps = gen_steps;
      spec.seed = gen_seed;
      auto [sys, scn] = generate_synthetic_instance(spec);
      save_scenario(sys, scn, gen_out);
      std::cout << "wrote " << gen_out << " (" << sys.units.size() << " units, "
                << sys.storages.size() << " storages, "
                << sys.investments.size() << " investments, T="
                << sys.time_grid.step_count << ")\n";
      return kExitOk;
    }

    if (*cmd_solve_mps) {
      const MpsReadResult read = read_mps(mps_in);
      SolveRequest req;
      req.objective = read.active;
      SolveConfig cfg;
      cfg.rel_gap = mps_gap;
      cfg.time_limit = mps_time_limit;
      cfg.max_nonzeros = mps_max_nnz;
      const SolveResult res = branch_and_bound(read.model, req, cfg);
      print_solve_summary(res);
      if (!mps_sol.empty() && !res.assignment.empty()) {
        std::ofstream out(mps_sol, std::ios::binary);
        if (!out) throw IoError("cannot write solution '" + mps_sol + "'");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", res.objective_value);
        out << "=obj= " << buf << "\n";
        for (const auto& v : read.model.variables()) {
          std::snprintf(buf, sizeof buf, "%.17g",
                        res.assignment[static_cast<size_t>(v.index)]);
          out << v.name << ' ' << buf << "\n";
        }
      }
      return res.status == SolveStatus::Optimal ||
                     res.status == SolveStatus::GapReached
                 ? kExitOk
                 : kExitDiagnostics;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  return kExitUsage;
}
