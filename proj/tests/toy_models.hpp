// Shared hand-built fixtures for the test suites.
#ifndef DHPLAN_TESTS_TOY_MODELS_HPP
#define DHPLAN_TESTS_TOY_MODELS_HPP

#include <utility>
#include <vector>

#include "dhplan/milp.hpp"
#include "dhplan/system.hpp"

namespace toy {

using namespace dhplan;

/// One balance node with a gas market and one gas->heat unit feeding a
/// demand node over an edge. The smallest system that exercises every
/// variable family except storage and investments.
inline std::pair<MultiEnergySystem, Scenario> unit_market_edge(int T,
                                                               double demand) {
  MultiEnergySystem sys;
  sys.time_grid = {T, 1.0, "toy"};
  sys.resources = {{"heat", ResourceKind::Heat}, {"gas", ResourceKind::Fuel}};
  sys.topology.nodes = {{"plant", NodeKind::Balance}, {"city", NodeKind::Demand}};
  sys.topology.edges = {{"plant", "city", "heat", 100.0, true}};

  GeneratorUnit u;
  u.id = "boiler";
  u.node = "plant";
  u.conversions.push_back({"gas", "heat", PwlCurve::linear(0.9, 40.0), {}});
  u.output_bounds["heat"] = {0.0, 36.0};
  sys.units.push_back(std::move(u));

  Market m;
  m.id = "gas";
  m.node = "plant";
  m.resource = "gas";
  m.purchase_price.assign(static_cast<size_t>(T), 30.0);
  m.sale_price.assign(static_cast<size_t>(T), 0.0);
  m.purchase_bounds = {0.0, kInf};
  m.sale_bounds = {0.0, 0.0};
  m.purchase_emission_factor = 0.2;
  sys.markets.push_back(std::move(m));

  Scenario scn;
  scn.demand[{"city", "heat"}].assign(static_cast<size_t>(T), demand);
  scn.horizon_fraction = expected_horizon_fraction(sys.time_grid);
  return {std::move(sys), std::move(scn)};
}

/// Single-node system with one storage only (variable-count fixtures).
inline std::pair<MultiEnergySystem, Scenario> storage_only(int T) {
  MultiEnergySystem sys;
  sys.time_grid = {T, 1.0, "toy"};
  sys.resources = {{"heat", ResourceKind::Heat}};
  sys.topology.nodes = {{"n", NodeKind::Balance}};
  StorageUnit k;
  k.id = "tank";
  k.node = "n";
  k.resource = "heat";
  k.level_bounds = {0.0, 50.0};
  k.charge_max = 10.0;
  k.discharge_max = 10.0;
  sys.storages.push_back(std::move(k));
  Scenario scn;
  scn.horizon_fraction = expected_horizon_fraction(sys.time_grid);
  return {std::move(sys), std::move(scn)};
}

/// Two units (cheap dirty, expensive clean investment candidate) plus a
/// pricey backup, one node, constant demand. The clean portfolio costs
/// exactly 10% more than the dirty anchor; emissions flip accordingly.
/// With T=2 this stays within brute-force reach.
inline std::pair<MultiEnergySystem, Scenario> clean_vs_dirty(int T = 2,
                                                             double demand = 10.0) {
  MultiEnergySystem sys;
  sys.time_grid = {T, 1.0, "toy"};
  sys.resources = {{"heat", ResourceKind::Heat},
                   {"gas", ResourceKind::Fuel},
                   {"bio", ResourceKind::Fuel}};
  sys.topology.nodes = {{"town", NodeKind::Demand}};

  auto unit = [&](const char* id, const char* fuel, double eff) {
    GeneratorUnit u;
    u.id = id;
    u.node = "town";
    u.conversions.push_back({fuel, "heat", PwlCurve::linear(eff, 20.0 / eff), {}});
    u.output_bounds["heat"] = {0.0, 20.0};
    return u;
  };
  sys.units.push_back(unit("dirty", "gas", 1.0));
  sys.units.push_back(unit("clean", "bio", 1.0));
  sys.units.push_back(unit("backup", "gas", 0.5));

  auto market = [&](const char* id, const char* res, double price,
                    double emis) {
    Market m;
    m.id = id;
    m.node = "town";
    m.resource = res;
    m.purchase_price.assign(static_cast<size_t>(T), price);
    m.sale_price.assign(static_cast<size_t>(T), 0.0);
    m.purchase_bounds = {0.0, kInf};
    m.sale_bounds = {0.0, 0.0};
    m.purchase_emission_factor = emis;
    return m;
  };
  sys.markets.push_back(market("gasmkt", "gas", 30.0, 0.2));
  sys.markets.push_back(market("biomkt", "bio", 30.0, 0.0));

  // annualized capex equals exactly 10% of the dirty anchor cost:
  // anchor = demand*T*30; capex*hf/25 = 0.1*anchor
  const double anchor = demand * static_cast<double>(T) * 30.0;
  InvestmentOption inv;
  inv.id = "clean_inv";
  inv.enabled_entities = {"clean"};
  inv.depreciation_years = 25;
  inv.capex = 0.1 * anchor * 25.0 * kHoursPerYear /
              (static_cast<double>(T) * 1.0);
  inv.annual_fixed_cost = 0.0;
  sys.investments.push_back(std::move(inv));

  Scenario scn;
  scn.demand[{"town", "heat"}].assign(static_cast<size_t>(T), demand);
  scn.horizon_fraction = expected_horizon_fraction(sys.time_grid);
  return {std::move(sys), std::move(scn)};
}

/// Hand LP/MILP construction helpers.
struct ModelSpec {
  MilpModel model;

  int cont(const std::string& name, double lo, double hi) {
    return model.add_variable(name, VarKind::Continuous, lo, hi);
  }
  int bin(const std::string& name) {
    return model.add_variable(name, VarKind::Binary, 0.0, 1.0);
  }
  void row(const std::string& name, Sense sense, double rhs,
           std::vector<LinTerm> terms) {
    LinConstraint c;
    c.name = name;
    c.sense = sense;
    c.rhs = rhs;
    c.terms = std::move(terms);
    model.add_constraint(std::move(c));
  }
  void cost(std::vector<LinTerm> terms, double constant = 0.0) {
    LinExpr e;
    e.terms = std::move(terms);
    e.constant = constant;
    model.set_objective_cost(std::move(e));
  }
  void emissions(std::vector<LinTerm> terms) {
    LinExpr e;
    e.terms = std::move(terms);
    model.set_objective_emissions(std::move(e));
  }
};

}  // namespace toy

#endif
