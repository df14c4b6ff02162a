#include "dhplan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dhplan/errors.hpp"

namespace dhplan {

namespace {

/// splitmix64: tiny, portable, identical streams on every platform.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double in(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

std::string rid(const char* base, int i) { return base + std::to_string(i); }

std::vector<double> demand_profile(Rng& rng, int steps, double base) {
  std::vector<double> d(static_cast<size_t>(steps));
  const double phase = rng.in(0.0, 2.0 * std::numbers::pi);
  for (int t = 0; t < steps; ++t) {
    const double daily =
        std::sin(2.0 * std::numbers::pi * static_cast<double>(t % 24) / 24.0 -
                 phase);
    const double weekly =
        std::sin(2.0 * std::numbers::pi * static_cast<double>(t % 168) / 168.0);
    double v = base * (1.0 + 0.30 * daily + 0.10 * weekly + rng.in(-0.06, 0.06));
    d[static_cast<size_t>(t)] = std::max(v, 0.05 * base);
  }
  return d;
}

std::vector<double> price_series(Rng& rng, int steps, double base,
                                 double daily_swing) {
  std::vector<double> p(static_cast<size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    const double daily =
        std::sin(2.0 * std::numbers::pi * static_cast<double>(t % 24) / 24.0);
    p[static_cast<size_t>(t)] =
        std::max(1.0, base * (1.0 + daily_swing * daily + rng.in(-0.05, 0.05)));
  }
  return p;
}

GeneratorUnit make_chp(const std::string& id, const std::string& node,
                       const std::string& fuel, double heat_cap, Rng& rng,
                       int steps, bool efficient) {
  GeneratorUnit u;
  u.id = id;
  u.node = node;
  const double eff_h = efficient ? rng.in(0.48, 0.52) : rng.in(0.42, 0.48);
  const double eff_p = efficient ? rng.in(0.40, 0.44) : rng.in(0.33, 0.40);
  const double in_max = heat_cap / eff_h;
  u.conversions.push_back({fuel, "heat", PwlCurve::linear(eff_h, in_max), {}});
  u.conversions.push_back({fuel, "power", PwlCurve::linear(eff_p, in_max), {}});
  u.min_uptime_steps = steps >= 12 ? 2 : 0;
  u.min_downtime_steps = steps >= 24 ? 2 : 0;
  u.output_bounds["heat"] = {0.0, heat_cap};
  u.output_bounds["power"] = {0.0, in_max * eff_p};
  u.fixed_running_cost = heat_cap * rng.in(0.15, 0.30);
  u.startup_cost = heat_cap * rng.in(1.0, 2.0);
  return u;
}

GeneratorUnit make_heating_station(const std::string& id,
                                   const std::string& node,
                                   const std::string& fuel, double heat_cap,
                                   Rng& rng) {
  GeneratorUnit u;
  u.id = id;
  u.node = node;
  const double eff = rng.in(0.88, 0.95);
  const double in_max = heat_cap / eff;
  u.conversions.push_back({fuel, "heat", PwlCurve::linear(eff, in_max), {}});
  u.output_bounds["heat"] = {0.0, heat_cap};
  u.ramp_up = 0.5 * heat_cap;
  u.ramp_down = 0.5 * heat_cap;
  u.fixed_running_cost = heat_cap * rng.in(0.05, 0.15);
  u.startup_cost = heat_cap * rng.in(0.3, 0.8);
  return u;
}

GeneratorUnit make_power_to_heat(const std::string& id, const std::string& node,
                                 double heat_cap, double cop, Rng& rng) {
  GeneratorUnit u;
  u.id = id;
  u.node = node;
  const double in_max = heat_cap / cop;
  u.conversions.push_back({"power", "heat", PwlCurve::linear(cop, in_max), {}});
  u.output_bounds["heat"] = {0.0, heat_cap};
  u.fixed_running_cost = heat_cap * rng.in(0.02, 0.08);
  u.startup_cost = heat_cap * rng.in(0.1, 0.3);
  return u;
}

StorageUnit make_heat_storage(const std::string& id, const std::string& node,
                              double energy_cap, double initial, Rng& rng) {
  StorageUnit k;
  k.id = id;
  k.node = node;
  k.resource = "heat";
  k.loss_factor = rng.in(0.990, 0.998);
  k.load_eff = rng.in(0.93, 0.98);
  k.unload_eff = rng.in(0.93, 0.98);
  k.level_bounds = {0.0, energy_cap};
  k.charge_max = energy_cap / 4.0;
  k.discharge_max = energy_cap / 4.0;
  k.initial_level = initial;
  return k;
}

}  // namespace

std::pair<MultiEnergySystem, Scenario> generate_synthetic_instance(
    const SyntheticSpec& spec) {
  if (spec.regions < 1 || spec.units_per_region < 1 || spec.steps < 1 ||
      spec.invest_count < 0)
    throw Error("synthetic instance counts must be >= 1 (investments >= 0)");

  Rng rng(spec.seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
  const int R = spec.regions;
  const int U = spec.units_per_region;
  const int T = spec.steps;

  MultiEnergySystem sys;
  Scenario scn;
  sys.name = "synthetic-r" + std::to_string(R) + "-u" + std::to_string(U) +
             "-i" + std::to_string(spec.invest_count) + "-t" +
             std::to_string(T) + "-s" + std::to_string(spec.seed);
  sys.time_grid = {T, 1.0, "synthetic"};
  sys.resources = {{"heat", ResourceKind::Heat},
                   {"power", ResourceKind::Power},
                   {"gas", ResourceKind::Fuel},
                   {"bio", ResourceKind::Fuel}};

  // regional demand and the Fig.-1-style node skeleton
  std::vector<double> region_base(static_cast<size_t>(R));
  std::vector<double> region_peak(static_cast<size_t>(R));
  for (int r = 0; r < R; ++r) {
    sys.topology.nodes.push_back({rid("dem", r), NodeKind::Demand});
    sys.topology.nodes.push_back({rid("hub", r), NodeKind::Balance});
    region_base[static_cast<size_t>(r)] = rng.in(40.0, 80.0);
    auto series = demand_profile(rng, T, region_base[static_cast<size_t>(r)]);
    region_peak[static_cast<size_t>(r)] =
        *std::max_element(series.begin(), series.end());
    scn.demand[{rid("dem", r), "heat"}] = std::move(series);
  }
  sys.topology.nodes.push_back({"gasnode", NodeKind::Market});
  sys.topology.nodes.push_back({"pownode", NodeKind::Market});
  sys.topology.nodes.push_back({"bionode", NodeKind::Market});
  scn.horizon_fraction = expected_horizon_fraction(sys.time_grid);

  // existing fleet: CHP and heating-station slots alternating by global
  // index, capacities split 57/43 with seeded jitter
  double share_hs = 0.43 + rng.in(-0.02, 0.02);
  for (int r = 0; r < R; ++r) {
    const double cap_total = 1.6 * region_peak[static_cast<size_t>(r)];
    std::vector<int> chp_slots, hs_slots;
    for (int u = 0; u < U; ++u) {
      const int g = r * U + u;
      (g % 2 == 0 ? chp_slots : hs_slots).push_back(u);
    }
    const double chp_each =
        chp_slots.empty() ? 0.0
                          : cap_total * (1.0 - share_hs) /
                                static_cast<double>(chp_slots.size());
    const double hs_each =
        hs_slots.empty()
            ? 0.0
            : cap_total * share_hs / static_cast<double>(hs_slots.size());
    for (int u = 0; u < U; ++u) {
      const bool is_chp =
          std::find(chp_slots.begin(), chp_slots.end(), u) != chp_slots.end();
      const std::string id =
          (is_chp ? "chp" : "hs") + std::to_string(r) + "_" + std::to_string(u);
      if (is_chp)
        sys.units.push_back(
            make_chp(id, rid("hub", r), "gas", chp_each, rng, T, false));
      else
        sys.units.push_back(
            make_heating_station(id, rid("hub", r), "gas", hs_each, rng));
    }
    sys.storages.push_back(make_heat_storage(
        rid("sto", r), rid("dem", r),
        3.0 * region_base[static_cast<size_t>(r)],
        0.5 * region_base[static_cast<size_t>(r)], rng));
  }

  // edges: hub->demand feeders, bidirectional heat links between
  // neighbouring demand nodes, fuel and power side connections
  for (int r = 0; r < R; ++r) {
    sys.topology.edges.push_back({rid("hub", r), rid("dem", r), "heat",
                                  2.5 * region_peak[static_cast<size_t>(r)],
                                  true});
  }
  for (int r = 0; r + 1 < R; ++r) {
    const double cap = 0.45 * std::min(region_peak[static_cast<size_t>(r)],
                                       region_peak[static_cast<size_t>(r) + 1]);
    sys.topology.edges.push_back(
        {rid("dem", r), rid("dem", r + 1), "heat", cap, false});
  }
  for (int r = 0; r < R; ++r) {
    sys.topology.edges.push_back(
        {"gasnode", rid("hub", r), "gas",
         6.0 * region_peak[static_cast<size_t>(r)], true});
    sys.topology.edges.push_back(
        {"bionode", rid("hub", r), "bio",
         4.0 * region_peak[static_cast<size_t>(r)], true});
    sys.topology.edges.push_back(
        {"pownode", rid("hub", r), "power",
         4.0 * region_peak[static_cast<size_t>(r)], false});
  }

  // markets: gas and biomass fuel purchase, two-way power trading
  {
    Market gas;
    gas.id = "mkt_gas";
    gas.node = "gasnode";
    gas.resource = "gas";
    gas.purchase_price = price_series(rng, T, rng.in(26.0, 34.0), 0.04);
    gas.sale_price.assign(static_cast<size_t>(T), 0.0);
    gas.purchase_bounds = {0.0, kInf};
    gas.sale_bounds = {0.0, 0.0};
    gas.purchase_emission_factor = 0.201;
    sys.markets.push_back(std::move(gas));

    Market bio;
    bio.id = "mkt_bio";
    bio.node = "bionode";
    bio.resource = "bio";
    bio.purchase_price = price_series(rng, T, rng.in(38.0, 48.0), 0.02);
    bio.sale_price.assign(static_cast<size_t>(T), 0.0);
    bio.purchase_bounds = {0.0, kInf};
    bio.sale_bounds = {0.0, 0.0};
    bio.purchase_emission_factor = 0.025;
    sys.markets.push_back(std::move(bio));

    Market pow;
    pow.id = "mkt_pow";
    pow.node = "pownode";
    pow.resource = "power";
    pow.purchase_price = price_series(rng, T, rng.in(65.0, 95.0), 0.25);
    pow.sale_price.resize(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t)
      pow.sale_price[static_cast<size_t>(t)] =
          0.8 * pow.purchase_price[static_cast<size_t>(t)];
    pow.purchase_bounds = {0.0, kInf};
    pow.sale_bounds = {0.0, kInf};
    pow.purchase_emission_factor = 0.35;
    sys.markets.push_back(std::move(pow));
  }

  // investment candidates, templates cycling: biomass heating station,
  // heat pump, electrical heater, efficient CHP, gas-turbine-style CHP
  // upgrade, heat storage
  for (int k = 0; k < spec.invest_count; ++k) {
    const int r = k % R;
    const int tpl = k % 6;
    const double c = region_peak[static_cast<size_t>(r)];
    InvestmentOption inv;
    inv.depreciation_years = 25;
    std::string ent;
    double capex = 0.0;
    switch (tpl) {
      case 0: {
        ent = rid("cand_biohs", k);
        GeneratorUnit u =
            make_heating_station(ent, rid("hub", r), "bio", 0.40 * c, rng);
        u.min_uptime_steps = 0;
        u.ramp_up = kInf;
        u.ramp_down = kInf;
        sys.units.push_back(std::move(u));
        capex = 0.40 * c * 120e3;
        inv.id = rid("inv_biohs", k);
        break;
      }
      case 1: {
        ent = rid("cand_hp", k);
        sys.units.push_back(make_power_to_heat(ent, rid("hub", r), 0.30 * c,
                                               rng.in(2.8, 3.3), rng));
        capex = 0.30 * c * 350e3;
        inv.id = rid("inv_heatpump", k);
        break;
      }
      case 2: {
        ent = rid("cand_eh", k);
        sys.units.push_back(make_power_to_heat(ent, rid("hub", r), 0.40 * c,
                                               rng.in(0.97, 0.99), rng));
        capex = 0.40 * c * 80e3;
        inv.id = rid("inv_elheater", k);
        break;
      }
      case 3: {
        ent = rid("cand_chp", k);
        GeneratorUnit u = make_chp(ent, rid("hub", r), "gas", 0.45 * c, rng,
                                   /*steps=*/0, true);
        u.min_uptime_steps = 0;
        u.min_downtime_steps = 0;
        sys.units.push_back(std::move(u));
        capex = 0.45 * c * 700e3;
        inv.id = rid("inv_chp", k);
        break;
      }
      case 4: {
        ent = rid("cand_gt", k);
        GeneratorUnit u = make_chp(ent, rid("hub", r), "gas", 0.30 * c, rng,
                                   /*steps=*/0, true);
        u.min_uptime_steps = 0;
        u.min_downtime_steps = 0;
        // turbine-style: power-heavy conversion pair
        u.conversions[0].curve = PwlCurve::linear(0.34, 0.30 * c / 0.34);
        u.conversions[1].curve = PwlCurve::linear(0.46, 0.30 * c / 0.34);
        u.output_bounds["power"] = {0.0, 0.30 * c / 0.34 * 0.46};
        sys.units.push_back(std::move(u));
        capex = 0.30 * c * 500e3;
        inv.id = rid("inv_gasturbine", k);
        break;
      }
      default: {
        ent = rid("cand_sto", k);
        StorageUnit s = make_heat_storage(ent, rid("dem", r), 6.0 * c, 0.0, rng);
        sys.storages.push_back(std::move(s));
        capex = 6.0 * c * 15e3;
        inv.id = rid("inv_storage", k);
        break;
      }
    }
    inv.enabled_entities = {ent};
    inv.capex = capex * rng.in(0.9, 1.1);
    inv.annual_fixed_cost = inv.capex * 0.015;
    sys.investments.push_back(std::move(inv));
  }

  return {std::move(sys), std::move(scn)};
}

}  // namespace dhplan
