#ifndef DHPLAN_SYSTEM_HPP
#define DHPLAN_SYSTEM_HPP

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dhplan {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Hours in one year, used to pro-rate annual cost figures to the
/// modeled horizon.
inline constexpr double kHoursPerYear = 8760.0;

enum class ResourceKind { Heat, Power, Fuel };

struct Resource {
  std::string id;
  ResourceKind kind = ResourceKind::Heat;
};

struct TimeGrid {
  int step_count = 0;
  double step_hours = 1.0;
  std::string start_label;  // informational calendar tag
};

/// Piecewise-linear input->output characteristic. Breakpoint inputs are
/// strictly increasing; all coordinates nonnegative.
struct PwlCurve {
  std::vector<std::pair<double, double>> breakpoints;  // (input, output)

  double input_min() const { return breakpoints.front().first; }
  double input_max() const { return breakpoints.back().first; }
  double output_min() const;
  double output_max() const;
  bool is_linear() const { return breakpoints.size() == 2; }

  /// Two-point convenience: {(0,0),(in_max, in_max*slope)}.
  static PwlCurve linear(double slope, double in_max);
};

/// Linear interpolation on the curve. Exact at breakpoints. Throws
/// std::out_of_range when input leaves the breakpoint range; `label`
/// names the offending curve in the message.
double evaluate_pwl(const PwlCurve& curve, double input,
                    const std::string& label = {});

/// One input->output conversion of a generating unit. `per_step_curves`,
/// when nonempty, overrides `curve` step by step (length = step_count).
struct Conversion {
  std::string input;   // resource id consumed
  std::string output;  // resource id produced
  PwlCurve curve;
  std::vector<PwlCurve> per_step_curves;

  const PwlCurve& curve_at(int t) const {
    return per_step_curves.empty() ? curve
                                   : per_step_curves[static_cast<size_t>(t)];
  }
  bool time_varying() const { return !per_step_curves.empty(); }
};

struct Bounds {
  double lo = 0.0;
  double hi = kInf;
};

struct GeneratorUnit {
  std::string id;
  std::string node;
  std::vector<Conversion> conversions;
  int min_uptime_steps = 0;
  int min_downtime_steps = 0;
  double ramp_up = kInf;    // MWh-per-step output delta; kInf = unconstrained
  double ramp_down = kInf;
  std::map<std::string, Bounds> output_bounds;    // resource -> (c_min, c_max)
  double fixed_running_cost = 0.0;                // per committed step
  double startup_cost = 0.0;                      // per start
  std::map<std::string, double> variable_cost;    // per input resource, /MWh
  std::map<std::string, double> emission_factor;  // per input resource, t/MWh
};

struct StorageUnit {
  std::string id;
  std::string node;
  std::string resource;
  double loss_factor = 1.0;   // per-step retention of carried level, in [0,1]
  double load_eff = 1.0;      // in (0,1]
  double unload_eff = 1.0;    // in (0,1]
  Bounds level_bounds;        // MWh
  double charge_max = kInf;   // MWh-per-step
  double discharge_max = kInf;
  double initial_level = 0.0;
  bool cyclic = false;        // optional h_{T-1} = h_0 closure
};

struct Market {
  std::string id;
  std::string node;
  std::string resource;
  std::vector<double> purchase_price;  // per step, currency/MWh
  std::vector<double> sale_price;
  Bounds purchase_bounds;  // MWh-per-step
  Bounds sale_bounds;
  double purchase_emission_factor = 0.0;  // t/MWh on purchased energy
};

enum class NodeKind { Balance, Demand, Market };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Balance;
};

struct Edge {
  std::string from;
  std::string to;
  std::string resource;
  double capacity = kInf;  // MWh-per-step
  bool directed = true;    // undirected edges may carry flow both ways
};

struct NetworkTopology {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
};

struct InvestmentOption {
  std::string id;
  std::vector<std::string> enabled_entities;  // unit or storage ids
  double capex = 0.0;
  int depreciation_years = 25;
  double annual_fixed_cost = 0.0;
};

struct MultiEnergySystem {
  std::string name;
  std::string currency_unit = "EUR";
  std::string emission_unit = "tCO2";
  TimeGrid time_grid;
  std::vector<Resource> resources;
  NetworkTopology topology;
  std::vector<GeneratorUnit> units;
  std::vector<StorageUnit> storages;
  std::vector<Market> markets;
  std::vector<InvestmentOption> investments;

  const Resource* find_resource(const std::string& id) const;
  const Node* find_node(const std::string& id) const;
  const GeneratorUnit* find_unit(const std::string& id) const;
  const StorageUnit* find_storage(const std::string& id) const;
};

/// Demand/price data bound to system entities. Market price series live
/// on the Market structs; demand series live here.
struct Scenario {
  /// (node id, resource id) -> series of length step_count, MWh-per-step.
  std::map<std::pair<std::string, std::string>, std::vector<double>> demand;
  /// (step_count * step_hours) / 8760; scales annual cost figures.
  double horizon_fraction = 0.0;

  double demand_at(const std::string& node, const std::string& resource,
                   int t) const;
  bool has_demand(const std::string& node, const std::string& resource) const;
};

inline double expected_horizon_fraction(const TimeGrid& g) {
  return static_cast<double>(g.step_count) * g.step_hours / kHoursPerYear;
}

/// One violated rule, as data. Validation never throws.
struct Diagnostic {
  std::string entity;   // offending entity id (or section for file-level)
  std::string rule;     // short machine-ish rule tag
  std::string message;  // human-readable detail
};

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

/// Checks every type invariant and cross-reference of (sys, scn).
/// Empty result means the pair is well-formed.
std::vector<Diagnostic> validate_system(const MultiEnergySystem& sys,
                                        const Scenario& scn);

/// Minimum up/down windows of Constraint-style windowed sums:
/// T_up = {max(0, t - min_uptime + 1) .. t}, clipped at the horizon
/// start; a window always contains t itself.
struct UpDownWindows {
  std::vector<int> up;
  std::vector<int> down;
};
UpDownWindows min_updown_windows(const GeneratorUnit& unit, int t);

}  // namespace dhplan

#endif
