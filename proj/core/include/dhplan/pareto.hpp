#ifndef DHPLAN_PARETO_HPP
#define DHPLAN_PARETO_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dhplan/backend.hpp"
#include "dhplan/milp.hpp"

namespace dhplan {

struct SweepConfig {
  /// Cost-cap relaxation fractions, strictly increasing, all > 0.
  std::vector<double> relaxation_steps = {0.01, 0.05, 0.10,
                                          0.15, 0.20, 0.25, 0.30};
  /// Per-step MIP gap; steps not listed fall back to default_gap.
  std::map<double, double> gap_schedule = {{0.01, 0.02}, {0.05, 0.01}};
  double default_gap = 0.005;
  /// Worker threads for the capped solves (the anchor is a barrier).
  /// 1 = sequential.
  int jobs = 1;
  SolveConfig solve;

  double gap_for_step(double step) const;
  void check() const;  // throws Error on invariant violations
};

enum class InvestmentClass { Robust, TargetDependent, Rejected };

std::string to_string(InvestmentClass c);

struct ParetoPoint {
  double step = 0.0;
  double cost = 0.0;
  double emissions = 0.0;
  double normalized_cost = 0.0;
  double normalized_emissions = 0.0;
  /// Selected flag per investment option, model order.
  std::vector<int> investment_vector;
  /// Investments whose relaxation value sat near 0.5 (degenerate tie).
  std::vector<std::string> fragile_investments;
  SolveStatus status = SolveStatus::Infeasible;
  double rel_gap = kInf;
  long node_count = 0;
  double wall_time = 0.0;
  std::string failure;  // nonempty when this step failed
};

struct SolutionCatalog {
  double anchor_cost = 0.0;
  double anchor_emissions = 0.0;  // emissions at the first point (norm base)
  std::vector<std::string> investment_ids;
  std::vector<ParetoPoint> points;
  std::map<std::string, InvestmentClass> classification;
};

/// Minimizes f1 at the gap assigned to the first sweep step.
struct AnchorResult {
  double anchor_cost = 0.0;
  SolveResult result;
};
AnchorResult solve_cost_anchor(const MilpModel& model,
                               const SolverBackend& backend,
                               const SweepConfig& sweep);

/// One capped solve: adds f1 <= (1+step)*anchor_cost, minimizes f2 at
/// `gap`, extracts the investment vector and audits the cap row.
ParetoPoint solve_emissions_capped(const MilpModel& model,
                                   const SolverBackend& backend,
                                   const SweepConfig& sweep,
                                   double anchor_cost, double step,
                                   double gap);

/// robust: selected at every point; rejected: at none; else
/// target-dependent. Requires at least one point.
std::map<std::string, InvestmentClass> classify_investments(
    const std::vector<std::string>& investment_ids,
    const std::vector<ParetoPoint>& points);

/// Full lexicographic sweep: anchor, one capped solve per step
/// (concurrent when sweep.jobs > 1), classification. Per-step failures
/// are recorded on the point; the catalog is still produced.
SolutionCatalog run_sweep(const MultiEnergySystem& sys, const Scenario& scn,
                          const SweepConfig& sweep,
                          const SolverBackend& backend);

/// Same, for an already assembled model.
SolutionCatalog run_sweep_model(const MilpModel& model,
                                const SweepConfig& sweep,
                                const SolverBackend& backend);

}  // namespace dhplan

#endif
