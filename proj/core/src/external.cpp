#include "dhplan/external.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "dhplan/errors.hpp"
#include "dhplan/mps.hpp"

namespace dhplan {

void SolverAdapterConfig::check() const {
  if (command_template.find("{model_path}") == std::string::npos)
    throw Error("adapter command template lacks {model_path}");
  if (command_template.find("{solution_path}") == std::string::npos)
    throw Error("adapter command template lacks {solution_path}");
}

namespace {

std::string substitute(std::string tpl, const std::string& key,
                       const std::string& value) {
  size_t pos = 0;
  while ((pos = tpl.find(key, pos)) != std::string::npos) {
    tpl.replace(pos, key.size(), value);
    pos += value.size();
  }
  return tpl;
}

std::filesystem::path pick_workdir(const SolverAdapterConfig& adapter) {
  if (!adapter.working_dir.empty()) return adapter.working_dir;
  if (const char* env = std::getenv("DHPLAN_WORKDIR"); env && *env)
    return std::filesystem::path(env);
  return std::filesystem::temp_directory_path();
}

std::atomic<unsigned> run_counter{0};

struct CommandOutput {
  int exit_code = -1;
  std::string output;
};

CommandOutput run_command(const std::string& cmd) {
  CommandOutput out;
  const std::string full = cmd + " 2>&1";
  FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) throw SolverFailure("failed to launch adapter command");
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    out.output.append(buf.data(), n);
  const int rc = ::pclose(pipe);
  out.exit_code = rc < 0 ? rc : (rc & 0x7f ? 128 + (rc & 0x7f) : rc >> 8);
  return out;
}

std::string fmt_double(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.12g", v);
  return b;
}

}  // namespace

ParsedSolution parse_solution_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SolverFailure("solution file '" + path.string() + "' missing");
  ParsedSolution sol;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    std::istringstream ls(line);
    std::string name;
    std::string value;
    if (!(ls >> name >> value))
      throw ParseError("solution line needs 'name value'", line_no);
    double v;
    try {
      size_t pos = 0;
      v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ParseError("malformed value '" + value + "' for '" + name + "'",
                       line_no);
    }
    if (name == "=obj=") {
      sol.has_objective = true;
      sol.objective = v;
    } else {
      sol.values[name] = v;
    }
  }
  return sol;
}

SolveResult run_external(const MilpModel& model, const SolveRequest& req,
                         const SolverAdapterConfig& adapter,
                         const SolveConfig& config) {
  adapter.check();
  const auto t0 = std::chrono::steady_clock::now();

  const std::filesystem::path dir = pick_workdir(adapter);
  std::filesystem::create_directories(dir);
  const unsigned serial = run_counter.fetch_add(1);
  const std::string stem = "dhplan-" + std::to_string(::getpid()) + "-" +
                           std::to_string(serial);
  const std::filesystem::path model_path = dir / (stem + ".mps");
  const std::filesystem::path solution_path = dir / (stem + ".sol");

  write_mps(model, model_path, req.objective, req.extra_rows);

  std::string cmd = adapter.command_template;
  cmd = substitute(cmd, "{model_path}", model_path.string());
  cmd = substitute(cmd, "{solution_path}", solution_path.string());
  cmd = substitute(cmd, "{rel_gap}", fmt_double(config.rel_gap));
  cmd = substitute(cmd, "{time_limit}", fmt_double(config.time_limit));

  const CommandOutput res = run_command(cmd);
  if (res.exit_code != 0)
    throw SolverFailure("adapter exited with code " +
                        std::to_string(res.exit_code) + ":\n" + res.output);

  const ParsedSolution sol = parse_solution_file(solution_path);

  SolveResult out;
  out.assignment.assign(static_cast<size_t>(model.num_variables()), 0.0);
  std::vector<std::string> missing;
  for (const auto& v : model.variables()) {
    auto it = sol.values.find(v.name);
    if (it == sol.values.end()) {
      if (missing.size() < 10) missing.push_back(v.name);
      continue;
    }
    out.assignment[static_cast<size_t>(v.index)] = it->second;
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "solution file omits " << missing.size() << "+ variables:";
    for (const auto& n : missing) msg << ' ' << n;
    throw ParseError(msg.str());
  }

  const AuditReport audit = audit_solution(model, out.assignment, req.extra_rows);
  if (audit.max_row_residual > 1e-5)
    throw SolverFailure("external solution violates row '" +
                        audit.worst_row.name + "' by " +
                        fmt_double(audit.worst_row.residual) +
                        "; refusing to report it optimal");

  const LinExpr& obj = model.objective(req.objective);
  out.objective_value = obj.evaluate(out.assignment);
  if (sol.has_objective &&
      std::abs(sol.objective - out.objective_value) >
          1e-6 * std::max(1.0, std::abs(out.objective_value)))
    throw SolverFailure("adapter-reported objective " + fmt_double(sol.objective) +
                        " disagrees with recomputed " +
                        fmt_double(out.objective_value));

  out.status = SolveStatus::Optimal;
  out.best_bound = out.objective_value;
  out.rel_gap = 0.0;
  out.node_count = 0;
  out.iteration_count = 0;
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace dhplan
