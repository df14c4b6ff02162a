#ifndef DHPLAN_MILP_HPP
#define DHPLAN_MILP_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dhplan/system.hpp"

namespace dhplan {

enum class VarKind { Continuous, Binary };

struct VarRef {
  int index = -1;
  std::string name;  // structured: tag[entity,resource,step]
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInf;
};

enum class Sense { LE, EQ, GE };

struct LinTerm {
  int var = -1;
  double coef = 0.0;
};

struct LinConstraint {
  std::vector<LinTerm> terms;
  Sense sense = Sense::EQ;
  double rhs = 0.0;
  std::string name;
};

/// Linear objective expression (no constant offset is ever needed here,
/// but MPS RHS-on-objective round-trips keep one).
struct LinExpr {
  std::vector<LinTerm> terms;
  double constant = 0.0;

  double evaluate(std::span<const double> x) const;
};

enum class Objective { Cost, Emissions };

/// Binary variable whose integral value is determined by two others:
/// implied = pos * (1 - neg). Start/stop indicators are of this shape;
/// rounding heuristics use it to produce consistent integer fixings.
struct BinaryImplication {
  int implied = -1;
  int pos = -1;  // -1: constant 1
  int neg = -1;  // -1: constant 0
};

/// Solver-agnostic MILP: indexed variables, linear rows, and the two
/// objectives f1 (cost) and f2 (emissions) kept as independent
/// expressions. Immutable once assembled.
class MilpModel {
 public:
  int add_variable(std::string name, VarKind kind, double lower, double upper);
  int add_constraint(LinConstraint row);

  const std::vector<VarRef>& variables() const { return vars_; }
  const std::vector<LinConstraint>& constraints() const { return rows_; }
  const VarRef& variable(int index) const {
    return vars_[static_cast<size_t>(index)];
  }

  /// Index of a variable by its structured name; -1 when absent.
  int find_variable(const std::string& name) const;

  const LinExpr& objective_cost() const { return objective_cost_; }
  const LinExpr& objective_emissions() const { return objective_emissions_; }
  const LinExpr& objective(Objective which) const {
    return which == Objective::Cost ? objective_cost_ : objective_emissions_;
  }
  void set_objective_cost(LinExpr e) { objective_cost_ = std::move(e); }
  void set_objective_emissions(LinExpr e) { objective_emissions_ = std::move(e); }

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const;
  std::int64_t num_nonzeros() const;

  /// Builder notes: degenerate balance rows, unreachable demand, ...
  const std::vector<Diagnostic>& build_notes() const { return build_notes_; }
  void add_build_note(Diagnostic d) { build_notes_.push_back(std::move(d)); }

  const std::vector<BinaryImplication>& implications() const {
    return implications_;
  }
  void add_implication(BinaryImplication b) { implications_.push_back(b); }

  /// True when a builder proved the model infeasible structurally
  /// (e.g. demand on a node with no variable at all).
  bool structurally_infeasible() const { return structurally_infeasible_; }
  void mark_structurally_infeasible() { structurally_infeasible_ = true; }

  /// Every constraint term must reference an existing variable and each
  /// name maps to exactly one variable. Returns violations as data.
  std::vector<Diagnostic> self_check() const;

 private:
  std::vector<VarRef> vars_;
  std::vector<LinConstraint> rows_;
  std::map<std::string, int> var_by_name_;
  LinExpr objective_cost_;
  LinExpr objective_emissions_;
  std::vector<Diagnostic> build_notes_;
  std::vector<BinaryImplication> implications_;
  bool structurally_infeasible_ = false;
};

/// Structured variable names used throughout the builder, the MPS
/// writer and the tests.
namespace var_name {
std::string x_in(const std::string& unit, const std::string& res, int t);
std::string x_out(const std::string& unit, const std::string& res, int t);
std::string status(const std::string& unit, int t);      // z
std::string startup(const std::string& unit, int t);     // s
std::string shutdown(const std::string& unit, int t);    // s_down
std::string level(const std::string& sto, int t);        // h
std::string charge(const std::string& sto, int t);
std::string discharge(const std::string& sto, int t);
std::string purchase(const std::string& mkt, int t);     // p
std::string sale(const std::string& mkt, int t);         // e
std::string edge_flow(int edge_index, const std::string& res, int t);
std::string invest(const std::string& inv);              // z-hat
std::string pwl_weight(const std::string& unit, int conv, int t, int b);
std::string pwl_segment(const std::string& unit, int conv, int t, int b);
}  // namespace var_name

/// Translates (system, scenario) into the MILP, one constraint family
/// per method. Methods must run in declaration order; assemble() does.
class ModelBuilder {
 public:
  ModelBuilder(const MultiEnergySystem& sys, const Scenario& scn);

  void build_variables();
  void build_balance();
  void build_conversion();
  void build_commitment_logic();
  void build_min_updown();
  void build_ramping();
  void build_storage();
  void build_investment_linking();
  void build_objectives();

  MilpModel take() { return std::move(model_); }
  const MilpModel& model() const { return model_; }

 private:
  int var(const std::string& name) const;
  double annualized_investment_cost(const InvestmentOption& inv) const;

  const MultiEnergySystem& sys_;
  const Scenario& scn_;
  MilpModel model_;
};

/// Runs all build steps in order. Requires validate_system(sys, scn) to
/// be empty (throws Error otherwise, carrying the diagnostics).
MilpModel assemble(const MultiEnergySystem& sys, const Scenario& scn);

}  // namespace dhplan

#endif
