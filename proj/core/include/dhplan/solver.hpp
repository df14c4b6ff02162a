#ifndef DHPLAN_SOLVER_HPP
#define DHPLAN_SOLVER_HPP

#include <span>
#include <string>
#include <vector>

#include "dhplan/milp.hpp"

namespace dhplan {

enum class SolveStatus { Optimal, Infeasible, Unbounded, GapReached, LimitReached };

std::string to_string(SolveStatus s);

enum class BranchingRule { MostFractional, PseudoCost };

struct SolveConfig {
  double rel_gap = 0.005;
  double time_limit = kInf;          // seconds
  long node_limit = -1;              // <0: unlimited
  double integer_tolerance = 1e-6;
  double lp_pivot_tolerance = 1e-9;
  BranchingRule branching = BranchingRule::MostFractional;
  /// Built-in solves refuse models with more nonzeros than this; larger
  /// instances are meant for the external bridge.
  std::int64_t max_nonzeros = 200000;
  /// Rounding heuristic at the root node (cheap incumbent for gap-based
  /// termination). Disable to observe pure best-bound behaviour.
  bool root_heuristic = true;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> assignment;  // one value per model variable
  double objective_value = kInf;
  double best_bound = -kInf;
  double rel_gap = kInf;
  long node_count = 0;
  long iteration_count = 0;
  double wall_time = 0.0;  // seconds
};

/// Which objective to minimize, plus rows appended on top of the model
/// (the Pareto driver's cost cap). The model itself stays untouched.
struct SolveRequest {
  Objective objective = Objective::Cost;
  std::vector<LinConstraint> extra_rows;
};

/// LP relaxation (binaries relaxed to [0,1]).
SolveResult solve_lp(const MilpModel& model, const SolveRequest& req,
                     const SolveConfig& config);

/// Depth-first-plunging best-bound branch and bound on the binary
/// variables. Deterministic for a fixed model and config.
SolveResult branch_and_bound(const MilpModel& model, const SolveRequest& req,
                             const SolveConfig& config);

/// Enumerates every binary assignment and solves the induced LP; the
/// exact optimum for testing. Refuses more than `binary_limit` binaries.
SolveResult brute_force(const MilpModel& model, const SolveRequest& req,
                        const SolveConfig& config, int binary_limit = 20);

struct BoundViolation {
  int var = -1;
  std::string name;
  double value = 0.0;
  double amount = 0.0;  // distance outside [lower, upper]
};

struct IntegralityViolation {
  int var = -1;
  std::string name;
  double value = 0.0;
};

struct RowResidual {
  std::string name;
  double residual = 0.0;
};

struct AuditReport {
  double max_row_residual = 0.0;
  RowResidual worst_row;
  std::vector<BoundViolation> bound_violations;
  std::vector<IntegralityViolation> integrality_violations;

  bool clean(double row_tol = 1e-6, double bound_tol = 1e-9,
             double int_tol = 1e-6) const;
};

/// Re-evaluates every row, bound and integrality marker against the
/// assignment. `extra_rows` are audited alongside the model's rows.
AuditReport audit_solution(const MilpModel& model,
                           std::span<const double> assignment,
                           std::span<const LinConstraint> extra_rows = {});

}  // namespace dhplan

#endif
