#ifndef DHPLAN_EXTERNAL_HPP
#define DHPLAN_EXTERNAL_HPP

#include <filesystem>
#include <map>
#include <string>

#include "dhplan/solver.hpp"

namespace dhplan {

/// Shell template wrapping an external MIP solver. The template must
/// contain {model_path} and {solution_path}; {rel_gap} and {time_limit}
/// are substituted when present.
struct SolverAdapterConfig {
  std::string command_template;
  std::string solution_format = "name-value-pairs";
  std::filesystem::path working_dir;  // empty: DHPLAN_WORKDIR or system tmp

  /// Throws Error when mandatory placeholders are missing.
  void check() const;
};

/// Parses the minimal solution exchange format: UTF-8 lines of
/// `name value`, optional first line `=obj= value`, `#` comments.
struct ParsedSolution {
  std::map<std::string, double> values;
  bool has_objective = false;
  double objective = 0.0;
};
ParsedSolution parse_solution_file(const std::filesystem::path& path);

/// Writes the model as MPS, runs the adapter command, parses the
/// solution file back and audits it against the model. Never returns
/// Optimal when the audited residual exceeds 1e-5 (throws SolverFailure
/// instead). Nonzero exit raises SolverFailure with captured output.
SolveResult run_external(const MilpModel& model, const SolveRequest& req,
                         const SolverAdapterConfig& adapter,
                         const SolveConfig& config);

}  // namespace dhplan

#endif
