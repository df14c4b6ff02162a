#include "dhplan/system.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dhplan {

double PwlCurve::output_min() const {
  double m = kInf;
  for (const auto& [bx, by] : breakpoints) m = std::min(m, by);
  return m;
}

double PwlCurve::output_max() const {
  double m = -kInf;
  for (const auto& [bx, by] : breakpoints) m = std::max(m, by);
  return m;
}

PwlCurve PwlCurve::linear(double slope, double in_max) {
  return PwlCurve{{{0.0, 0.0}, {in_max, in_max * slope}}};
}

double evaluate_pwl(const PwlCurve& curve, double input,
                    const std::string& label) {
  const auto& bp = curve.breakpoints;
  if (bp.size() < 2) throw std::out_of_range("curve '" + label + "' has fewer than 2 breakpoints");
  if (input < bp.front().first || input > bp.back().first) {
    std::ostringstream os;
    os << "input " << input << " outside curve '" << label << "' range ["
       << bp.front().first << ", " << bp.back().first << "]";
    throw std::out_of_range(os.str());
  }
  // upper_bound gives the first breakpoint strictly right of input
  auto it = std::upper_bound(
      bp.begin(), bp.end(), input,
      [](double v, const std::pair<double, double>& b) { return v < b.first; });
  if (it == bp.end()) return bp.back().second;  // input == last breakpoint
  if (it == bp.begin()) return bp.front().second;
  const auto& [x1, y1] = *(it - 1);
  const auto& [x2, y2] = *it;
  if (input == x1) return y1;
  const double w = (input - x1) / (x2 - x1);
  return y1 + w * (y2 - y1);
}

const Resource* MultiEnergySystem::find_resource(const std::string& id) const {
  for (const auto& r : resources)
    if (r.id == id) return &r;
  return nullptr;
}

const Node* MultiEnergySystem::find_node(const std::string& id) const {
  for (const auto& n : topology.nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const GeneratorUnit* MultiEnergySystem::find_unit(const std::string& id) const {
  for (const auto& u : units)
    if (u.id == id) return &u;
  return nullptr;
}

const StorageUnit* MultiEnergySystem::find_storage(const std::string& id) const {
  for (const auto& s : storages)
    if (s.id == id) return &s;
  return nullptr;
}

double Scenario::demand_at(const std::string& node, const std::string& resource,
                           int t) const {
  auto it = demand.find({node, resource});
  if (it == demand.end()) return 0.0;
  return it->second[static_cast<size_t>(t)];
}

bool Scenario::has_demand(const std::string& node,
                          const std::string& resource) const {
  return demand.count({node, resource}) > 0;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::ostringstream os;
  for (const auto& d : diags)
    os << d.entity << ": " << d.rule << ": " << d.message << "\n";
  return os.str();
}

namespace {

class Checker {
 public:
  Checker(const MultiEnergySystem& sys, const Scenario& scn)
      : sys_(sys), scn_(scn) {}

  std::vector<Diagnostic> run() {
    check_grid();
    check_resources();
    check_topology();
    check_units();
    check_storages();
    check_markets();
    check_investments();
    check_scenario();
    return std::move(diags_);
  }

 private:
  void add(const std::string& entity, const std::string& rule,
           const std::string& message) {
    diags_.push_back({entity, rule, message});
  }

  void check_unique(std::set<std::string>& pool, const std::string& id,
                    const char* what) {
    if (!pool.insert(id).second)
      add(id, "duplicate-id", std::string(what) + " id reused");
  }

  bool has_resource(const std::string& id) const {
    return sys_.find_resource(id) != nullptr;
  }
  bool has_node(const std::string& id) const {
    return sys_.find_node(id) != nullptr;
  }

  void check_grid() {
    if (sys_.time_grid.step_count < 1)
      add("time_grid", "step-count", "step_count must be >= 1");
    if (!(sys_.time_grid.step_hours > 0))
      add("time_grid", "step-hours", "step_hours must be > 0");
  }

  void check_resources() {
    for (const auto& r : sys_.resources)
      check_unique(resource_ids_, r.id, "resource");
  }

  void check_topology() {
    for (const auto& n : sys_.topology.nodes) check_unique(node_ids_, n.id, "node");
    int ei = 0;
    for (const auto& e : sys_.topology.edges) {
      const std::string tag = "edge#" + std::to_string(ei++);
      if (!has_node(e.from)) add(tag, "edge-endpoint", "unknown node '" + e.from + "'");
      if (!has_node(e.to)) add(tag, "edge-endpoint", "unknown node '" + e.to + "'");
      if (!has_resource(e.resource))
        add(tag, "edge-resource", "unknown resource '" + e.resource + "'");
      if (!(e.capacity >= 0)) add(tag, "edge-capacity", "capacity must be >= 0");
    }
  }

  void check_curve(const std::string& owner, const PwlCurve& c) {
    if (c.breakpoints.size() < 2) {
      add(owner, "curve-breakpoints", "needs at least 2 breakpoints");
      return;
    }
    double prev = -kInf;
    for (const auto& [bx, by] : c.breakpoints) {
      if (!(bx >= 0) || !(by >= 0))
        add(owner, "curve-coords", "breakpoint coordinates must be >= 0");
      if (!(bx > prev)) {
        add(owner, "curve-inputs", "breakpoint inputs must be strictly increasing");
        break;
      }
      prev = bx;
    }
  }

  void check_units() {
    const int T = sys_.time_grid.step_count;
    for (const auto& u : sys_.units) {
      check_unique(entity_ids_, u.id, "unit");
      if (!has_node(u.node)) add(u.id, "unit-node", "unknown node '" + u.node + "'");
      if (u.conversions.empty())
        add(u.id, "unit-conversions", "unit has no conversion");
      for (const auto& cv : u.conversions) {
        if (!has_resource(cv.input))
          add(u.id, "conversion-resource", "unknown input '" + cv.input + "'");
        if (!has_resource(cv.output))
          add(u.id, "conversion-resource", "unknown output '" + cv.output + "'");
        check_curve(u.id, cv.curve);
        if (!cv.per_step_curves.empty()) {
          if (static_cast<int>(cv.per_step_curves.size()) != T)
            add(u.id, "curve-table", "per-step curve table length != step_count");
          for (const auto& c : cv.per_step_curves) check_curve(u.id, c);
        }
      }
      if (u.min_uptime_steps < 0 || u.min_downtime_steps < 0)
        add(u.id, "min-times", "min up/down times must be >= 0");
      if (u.min_uptime_steps >= T && T > 0)
        add(u.id, "min-times", "min_uptime_steps must be < step_count");
      if (u.min_downtime_steps >= T && T > 0)
        add(u.id, "min-times", "min_downtime_steps must be < step_count");
      if (!(u.ramp_up >= 0) || !(u.ramp_down >= 0))
        add(u.id, "ramp", "ramp limits must be >= 0");
      for (const auto& [res, b] : u.output_bounds) {
        if (!has_resource(res))
          add(u.id, "output-bounds", "unknown resource '" + res + "'");
        if (!(b.lo <= b.hi)) add(u.id, "output-bounds", "c_min > c_max for '" + res + "'");
      }
      for (const auto& [res, v] : u.variable_cost) {
        (void)v;
        if (!has_resource(res))
          add(u.id, "variable-cost", "unknown resource '" + res + "'");
      }
      for (const auto& [res, v] : u.emission_factor) {
        (void)v;
        if (!has_resource(res))
          add(u.id, "emission-factor", "unknown resource '" + res + "'");
      }
    }
  }

  void check_storages() {
    for (const auto& k : sys_.storages) {
      check_unique(entity_ids_, k.id, "storage");
      if (!has_node(k.node)) add(k.id, "storage-node", "unknown node '" + k.node + "'");
      if (!has_resource(k.resource))
        add(k.id, "storage-resource", "unknown resource '" + k.resource + "'");
      if (!(k.loss_factor >= 0 && k.loss_factor <= 1))
        add(k.id, "loss-factor", "loss_factor must lie in [0,1]");
      if (!(k.load_eff > 0 && k.load_eff <= 1))
        add(k.id, "efficiency", "load efficiency out of (0,1]");
      if (!(k.unload_eff > 0 && k.unload_eff <= 1))
        add(k.id, "efficiency", "unload efficiency out of (0,1]");
      if (!(k.level_bounds.lo <= k.level_bounds.hi))
        add(k.id, "level-bounds", "c_min > c_max");
      if (!(k.initial_level >= k.level_bounds.lo &&
            k.initial_level <= k.level_bounds.hi))
        add(k.id, "initial-level", "initial level outside [c_min, c_max]");
      if (!(k.charge_max >= 0) || !(k.discharge_max >= 0))
        add(k.id, "flow-bounds", "flow bounds must be >= 0");
    }
  }

  void check_markets() {
    const size_t T = static_cast<size_t>(sys_.time_grid.step_count);
    for (const auto& m : sys_.markets) {
      check_unique(market_ids_, m.id, "market");
      if (!has_node(m.node)) add(m.id, "market-node", "unknown node '" + m.node + "'");
      if (!has_resource(m.resource))
        add(m.id, "market-resource", "unknown resource '" + m.resource + "'");
      if (m.purchase_price.size() != T)
        add(m.id, "series-length",
            "purchase price series length " + std::to_string(m.purchase_price.size()) +
                " != step_count " + std::to_string(T));
      if (m.sale_price.size() != T)
        add(m.id, "series-length",
            "sale price series length " + std::to_string(m.sale_price.size()) +
                " != step_count " + std::to_string(T));
      if (!(m.purchase_bounds.lo <= m.purchase_bounds.hi))
        add(m.id, "purchase-bounds", "bounds not ordered");
      if (!(m.sale_bounds.lo <= m.sale_bounds.hi))
        add(m.id, "sale-bounds", "bounds not ordered");
    }
  }

  void check_investments() {
    for (const auto& inv : sys_.investments) {
      check_unique(investment_ids_, inv.id, "investment");
      if (inv.enabled_entities.empty())
        add(inv.id, "invest-entities", "investment unlocks nothing");
      for (const auto& ent : inv.enabled_entities) {
        if (!sys_.find_unit(ent) && !sys_.find_storage(ent))
          add(inv.id, "invest-entities", "unknown entity '" + ent + "'");
      }
      if (!(inv.capex >= 0)) add(inv.id, "capex", "capex must be >= 0");
      if (inv.depreciation_years < 1)
        add(inv.id, "depreciation", "depreciation_years must be >= 1");
    }
  }

  void check_scenario() {
    const size_t T = static_cast<size_t>(sys_.time_grid.step_count);
    for (const auto& [key, series] : scn_.demand) {
      const auto& [node, resource] = key;
      const std::string tag = "demand(" + node + "," + resource + ")";
      if (!has_node(node)) add(tag, "demand-node", "unknown node '" + node + "'");
      if (!has_resource(resource))
        add(tag, "demand-resource", "unknown resource '" + resource + "'");
      if (series.size() != T)
        add(tag, "series-length",
            "series length " + std::to_string(series.size()) + " != step_count " +
                std::to_string(T));
      for (double v : series)
        if (!(v >= 0)) {
          add(tag, "demand-negative", "demand values must be >= 0");
          break;
        }
    }
    // every demand node carries at least one series
    for (const auto& n : sys_.topology.nodes) {
      if (n.kind != NodeKind::Demand) continue;
      bool any = false;
      for (const auto& [key, series] : scn_.demand) {
        (void)series;
        if (key.first == n.id) { any = true; break; }
      }
      if (!any) add(n.id, "demand-missing", "demand node has no demand series");
    }
    const double expect = expected_horizon_fraction(sys_.time_grid);
    if (std::abs(scn_.horizon_fraction - expect) > 1e-9 * std::max(1.0, expect))
      add("scenario", "horizon-fraction",
          "horizon_fraction inconsistent with time grid");
  }

  const MultiEnergySystem& sys_;
  const Scenario& scn_;
  std::vector<Diagnostic> diags_;
  // units and storages share one namespace: investments reference either
  std::set<std::string> resource_ids_, node_ids_, entity_ids_, market_ids_,
      investment_ids_;
};

}  // namespace

std::vector<Diagnostic> validate_system(const MultiEnergySystem& sys,
                                        const Scenario& scn) {
  return Checker(sys, scn).run();
}

UpDownWindows min_updown_windows(const GeneratorUnit& unit, int t) {
  UpDownWindows w;
  // a window always contains t; length max(min_time, 1), clipped at 0
  const int up_len = std::max(unit.min_uptime_steps, 1);
  const int down_len = std::max(unit.min_downtime_steps, 1);
  for (int tau = std::max(0, t - up_len + 1); tau <= t; ++tau) w.up.push_back(tau);
  for (int tau = std::max(0, t - down_len + 1); tau <= t; ++tau)
    w.down.push_back(tau);
  return w;
}

}  // namespace dhplan
