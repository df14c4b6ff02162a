#include "dhplan/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "dhplan/errors.hpp"

namespace dhplan {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& ptr, const std::string& msg) {
  throw ParseError(ptr + ": " + msg);
}

const json& need(const json& obj, const std::string& ptr, const char* key) {
  if (!obj.is_object()) fail(ptr, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(ptr + "/" + key, "missing required key");
  return *it;
}

std::string need_string(const json& obj, const std::string& ptr, const char* key) {
  const json& v = need(obj, ptr, key);
  if (!v.is_string()) fail(ptr + "/" + key, "expected a string");
  return v.get<std::string>();
}

double need_number(const json& obj, const std::string& ptr, const char* key) {
  const json& v = need(obj, ptr, key);
  if (!v.is_number()) fail(ptr + "/" + key, "expected a number");
  return v.get<double>();
}

double opt_number(const json& obj, const char* key, double dflt) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return dflt;
  return it->get<double>();
}

int opt_int(const json& obj, const char* key, int dflt) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return dflt;
  return it->get<int>();
}

bool opt_bool(const json& obj, const char* key, bool dflt) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return dflt;
  return it->get<bool>();
}

/// Bounds come as [lo, hi] with null meaning unbounded.
Bounds parse_bounds(const json& v, const std::string& ptr) {
  if (!v.is_array() || v.size() != 2) fail(ptr, "expected [lo, hi]");
  Bounds b;
  b.lo = v[0].is_null() ? -kInf : v[0].get<double>();
  b.hi = v[1].is_null() ? kInf : v[1].get<double>();
  return b;
}

json dump_bounds(const Bounds& b) {
  json v = json::array();
  if (std::isfinite(b.lo)) v.push_back(b.lo); else v.push_back(nullptr);
  if (std::isfinite(b.hi)) v.push_back(b.hi); else v.push_back(nullptr);
  return v;
}

PwlCurve parse_curve(const json& v, const std::string& ptr) {
  if (!v.is_array() || v.size() < 2) fail(ptr, "expected >= 2 [in, out] pairs");
  PwlCurve c;
  for (size_t i = 0; i < v.size(); ++i) {
    const json& bp = v[i];
    if (!bp.is_array() || bp.size() != 2)
      fail(ptr + "/" + std::to_string(i), "expected [input, output]");
    c.breakpoints.push_back({bp[0].get<double>(), bp[1].get<double>()});
  }
  return c;
}

json dump_curve(const PwlCurve& c) {
  json v = json::array();
  for (const auto& [x, y] : c.breakpoints) v.push_back(json::array({x, y}));
  return v;
}

ResourceKind parse_resource_kind(const std::string& s, const std::string& ptr) {
  if (s == "heat") return ResourceKind::Heat;
  if (s == "power") return ResourceKind::Power;
  if (s == "fuel") return ResourceKind::Fuel;
  fail(ptr, "unknown resource kind '" + s + "' (heat|power|fuel)");
}

const char* resource_kind_name(ResourceKind k) {
  switch (k) {
    case ResourceKind::Heat: return "heat";
    case ResourceKind::Power: return "power";
    case ResourceKind::Fuel: return "fuel";
  }
  return "?";
}

NodeKind parse_node_kind(const std::string& s, const std::string& ptr) {
  if (s == "balance") return NodeKind::Balance;
  if (s == "demand") return NodeKind::Demand;
  if (s == "market") return NodeKind::Market;
  fail(ptr, "unknown node kind '" + s + "' (balance|demand|market)");
}

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Balance: return "balance";
    case NodeKind::Demand: return "demand";
    case NodeKind::Market: return "market";
  }
  return "?";
}

std::map<std::string, double> parse_cost_map(const json& v, const std::string& ptr) {
  std::map<std::string, double> out;
  if (v.is_null()) return out;
  if (!v.is_object()) fail(ptr, "expected an object of resource -> number");
  for (auto it = v.begin(); it != v.end(); ++it)
    out[it.key()] = it.value().get<double>();
  return out;
}

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> load_timeseries_csv(const std::filesystem::path& path,
                                        int expected_len) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open time series '" + path.string() + "'");
  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty time series file " + path.string());
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,value")
    throw ParseError("time series '" + path.string() +
                     "' must start with header 't,value'", line_no);

  std::vector<double> values(static_cast<size_t>(expected_len), 0.0);
  std::vector<char> seen(static_cast<size_t>(expected_len), 0);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError("missing comma in '" + path.string() + "'", line_no);
    const std::string tstr = line.substr(0, comma);
    const std::string vstr = line.substr(comma + 1);
    int t;
    double v;
    try {
      size_t pos = 0;
      t = std::stoi(tstr, &pos);
      if (pos != tstr.size()) throw std::invalid_argument(tstr);
    } catch (const std::exception&) {
      throw ParseError("non-integer step '" + tstr + "' in " + path.string(),
                       line_no);
    }
    try {
      size_t pos = 0;
      v = std::stod(vstr, &pos);
      if (pos != vstr.size()) throw std::invalid_argument(vstr);
    } catch (const std::exception&) {
      throw ParseError("non-numeric value '" + vstr + "' in " + path.string(),
                       line_no);
    }
    if (t < 0 || t >= expected_len)
      throw ParseError("step " + std::to_string(t) + " outside 0.." +
                       std::to_string(expected_len - 1) + " in " + path.string(),
                       line_no);
    if (seen[static_cast<size_t>(t)])
      throw ParseError("duplicate step " + std::to_string(t) + " in " +
                       path.string(), line_no);
    seen[static_cast<size_t>(t)] = 1;
    values[static_cast<size_t>(t)] = v;
  }
  for (int t = 0; t < expected_len; ++t)
    if (!seen[static_cast<size_t>(t)])
      throw ParseError("missing step " + std::to_string(t) + " in " +
                       path.string());
  return values;
}

void write_timeseries_csv(const std::filesystem::path& path,
                          const std::vector<double>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write time series '" + path.string() + "'");
  out << "t,value\n";
  for (size_t t = 0; t < series.size(); ++t)
    out << t << ',' << num17(series[t]) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

LoadedScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("scenario '" + path.string() + "': " + e.what());
  }
  const std::filesystem::path dir = path.parent_path();

  LoadedScenario out;
  MultiEnergySystem& sys = out.system;

  if (auto it = doc.find("meta"); it != doc.end() && it->is_object()) {
    sys.name = it->value("name", "");
    sys.currency_unit = it->value("currency_unit", "EUR");
    sys.emission_unit = it->value("emission_unit", "tCO2");
  }

  {
    const json& tg = need(doc, "", "time_grid");
    sys.time_grid.step_count = static_cast<int>(need_number(tg, "/time_grid", "step_count"));
    sys.time_grid.step_hours = need_number(tg, "/time_grid", "step_hours");
    sys.time_grid.start_label = tg.value("start_label", "");
  }
  const int T = sys.time_grid.step_count;
  if (T < 1) fail("/time_grid/step_count", "must be >= 1");

  {
    const json& arr = need(doc, "", "resources");
    if (!arr.is_array()) fail("/resources", "expected an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string ptr = "/resources/" + std::to_string(i);
      Resource r;
      r.id = need_string(arr[i], ptr, "id");
      r.kind = parse_resource_kind(need_string(arr[i], ptr, "kind"), ptr);
      sys.resources.push_back(std::move(r));
    }
  }

  {
    const json& arr = need(doc, "", "nodes");
    if (!arr.is_array()) fail("/nodes", "expected an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string ptr = "/nodes/" + std::to_string(i);
      Node n;
      n.id = need_string(arr[i], ptr, "id");
      n.kind = parse_node_kind(need_string(arr[i], ptr, "kind"), ptr);
      sys.topology.nodes.push_back(std::move(n));
    }
  }

  {
    const json& arr = need(doc, "", "edges");
    if (!arr.is_array()) fail("/edges", "expected an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string ptr = "/edges/" + std::to_string(i);
      Edge e;
      e.from = need_string(arr[i], ptr, "from");
      e.to = need_string(arr[i], ptr, "to");
      e.resource = need_string(arr[i], ptr, "resource");
      e.capacity = opt_number(arr[i], "capacity", kInf);
      e.directed = opt_bool(arr[i], "directed", true);
      sys.topology.edges.push_back(std::move(e));
    }
  }

  {
    const json& arr = need(doc, "", "units");
    if (!arr.is_array()) fail("/units", "expected an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string ptr = "/units/" + std::to_string(i);
      const json& ju = arr[i];
      GeneratorUnit u;
      u.id = need_string(ju, ptr, "id");
      u.node = need_string(ju, ptr, "node");
      const json& convs = need(ju, ptr, "conversions");
      if (!convs.is_array() || convs.empty())
        fail(ptr + "/conversions", "expected a nonempty array");
      for (size_t c = 0; c < convs.size(); ++c) {
        const std::string cptr = ptr + "/conversions/" + std::to_string(c);
        Conversion cv;
        cv.input = need_string(convs[c], cptr, "input");
        cv.output = need_string(convs[c], cptr, "output");
        cv.curve = parse_curve(need(convs[c], cptr, "breakpoints"),
                               cptr + "/breakpoints");
        if (auto it = convs[c].find("per_step_breakpoints");
            it != convs[c].end() && !it->is_null()) {
          if (!it->is_array())
            fail(cptr + "/per_step_breakpoints", "expected an array of curves");
          for (size_t s = 0; s < it->size(); ++s)
            cv.per_step_curves.push_back(parse_curve(
                (*it)[s], cptr + "/per_step_breakpoints/" + std::to_string(s)));
        }
        u.conversions.push_back(std::move(cv));
      }
      u.min_uptime_steps = opt_int(ju, "min_uptime_steps", 0);
      u.min_downtime_steps = opt_int(ju, "min_downtime_steps", 0);
      u.ramp_up = opt_number(ju, "ramp_up", kInf);
      u.ramp_down = opt_number(ju, "ramp_down", kInf);
      if (auto it = ju.find("output_bounds"); it != ju.end() && !it->is_null()) {
        if (!it->is_object()) fail(ptr + "/output_bounds", "expected an object");
        for (auto b = it->begin(); b != it->end(); ++b)
          u.output_bounds[b.key()] =
              parse_bounds(b.value(), ptr + "/output_bounds/" + b.key());
      }
      u.fixed_running_cost = opt_number(ju, "fixed_running_cost", 0.0);
      u.startup_cost = opt_number(ju, "startup_cost", 0.0);
      if (auto it = ju.find("variable_cost"); it != ju.end())
        u.variable_cost = parse_cost_map(*it, ptr + "/variable_cost");
      if (auto it = ju.find("emission_factor"); it != ju.end())
        u.emission_factor = parse_cost_map(*it, ptr + "/emission_factor");
      sys.units.push_back(std::move(u));
    }
  }

  {
    const json& arr = need(doc, "", "storages");
    if (!arr.is_array()) fail("/storages", "expected an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string ptr = "/storages/" + std::to_string(i);
      const json& js = arr[i];
      StorageUnit k;
      k.id = need_string(js, ptr, "id");
      k.node = need_string(js, ptr, "node");
      k.resource = need_string(js, ptr, "resource");
      k.loss_factor = opt_number(js, "loss_factor", 1.0);
      k.load_eff = opt_number(js, "load_eff", 1.0);
      k.unload_eff = opt_number(js, "unload_eff", 1.0);
      k.level_bounds = parse_bounds(need(js, ptr, "level_bounds"),
                                    ptr + "/level_bounds");
      k.charge_max = opt_number(js, "charge_max", kInf);
      k.discharge_max = opt_number(js, "discharge_max", kInf);
      k.initial_level = opt_number(js, "initial_level", 0.0);
      k.cyclic = opt_bool(js, "cyclic", false);
      sys.storages.push_back(std::move(k));
    }
  }

  struct PriceRef {
    std::string market;
    std::string kind;
    std::filesystem::path path;
  };
  std::vector<PriceRef> price_refs;

  {
    const json& arr = need(doc, "", "markets");
    if (!arr.is_array()) fail("/markets", "expected an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string ptr = "/markets/" + std::to_string(i);
      const json& jm = arr[i];
      Market m;
      m.id = need_string(jm, ptr, "id");
      m.node = need_string(jm, ptr, "node");
      m.resource = need_string(jm, ptr, "resource");
      // scalar prices expand to constant series; series_refs can override
      m.purchase_price.assign(static_cast<size_t>(T),
                              opt_number(jm, "purchase_price", 0.0));
      m.sale_price.assign(static_cast<size_t>(T),
                          opt_number(jm, "sale_price", 0.0));
      m.purchase_bounds = jm.contains("purchase_bounds")
                              ? parse_bounds(jm["purchase_bounds"],
                                             ptr + "/purchase_bounds")
                              : Bounds{0.0, kInf};
      m.sale_bounds = jm.contains("sale_bounds")
                          ? parse_bounds(jm["sale_bounds"], ptr + "/sale_bounds")
                          : Bounds{0.0, 0.0};
      m.purchase_emission_factor = opt_number(jm, "purchase_emission_factor", 0.0);
      sys.markets.push_back(std::move(m));
    }
  }

  Scenario& scn = out.scenario;
  scn.horizon_fraction = expected_horizon_fraction(sys.time_grid);

  {
    const json& inv = need(doc, "", "investments");
    if (!inv.is_array()) fail("/investments", "expected an array");
    for (size_t i = 0; i < inv.size(); ++i) {
      const std::string ptr = "/investments/" + std::to_string(i);
      const json& ji = inv[i];
      InvestmentOption o;
      o.id = need_string(ji, ptr, "id");
      const json& ents = need(ji, ptr, "enables");
      if (!ents.is_array()) fail(ptr + "/enables", "expected an array of ids");
      for (const auto& e : ents) o.enabled_entities.push_back(e.get<std::string>());
      o.capex = need_number(ji, ptr, "capex");
      o.depreciation_years = opt_int(ji, "depreciation_years", 25);
      o.annual_fixed_cost = opt_number(ji, "annual_fixed_cost", 0.0);
      sys.investments.push_back(std::move(o));
    }
  }

  {
    const json& refs = need(doc, "", "series_refs");
    if (!refs.is_object()) fail("/series_refs", "expected an object");
    if (auto it = refs.find("demand"); it != refs.end()) {
      if (!it->is_array()) fail("/series_refs/demand", "expected an array");
      for (size_t i = 0; i < it->size(); ++i) {
        const std::string ptr = "/series_refs/demand/" + std::to_string(i);
        const json& jd = (*it)[i];
        const std::string node = need_string(jd, ptr, "node");
        const std::string res = need_string(jd, ptr, "resource");
        const std::string rel = need_string(jd, ptr, "path");
        scn.demand[{node, res}] = load_timeseries_csv(dir / rel, T);
      }
    }
    if (auto it = refs.find("market_prices"); it != refs.end()) {
      if (!it->is_array()) fail("/series_refs/market_prices", "expected an array");
      for (size_t i = 0; i < it->size(); ++i) {
        const std::string ptr = "/series_refs/market_prices/" + std::to_string(i);
        const json& jp = (*it)[i];
        PriceRef r;
        r.market = need_string(jp, ptr, "market");
        r.kind = need_string(jp, ptr, "kind");
        if (r.kind != "purchase" && r.kind != "sale")
          fail(ptr + "/kind", "expected 'purchase' or 'sale'");
        r.path = dir / need_string(jp, ptr, "path");
        price_refs.push_back(std::move(r));
      }
    }
  }

  for (const auto& r : price_refs) {
    Market* m = nullptr;
    for (auto& cand : sys.markets)
      if (cand.id == r.market) m = &cand;
    if (!m) fail("/series_refs/market_prices", "unknown market '" + r.market + "'");
    auto series = load_timeseries_csv(r.path, T);
    if (r.kind == "purchase") m->purchase_price = std::move(series);
    else m->sale_price = std::move(series);
  }

  out.diagnostics = validate_system(sys, scn);
  return out;
}

void save_scenario(const MultiEnergySystem& sys, const Scenario& scn,
                   const std::filesystem::path& path) {
  const std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);

  json doc;
  doc["meta"] = {{"name", sys.name},
                 {"currency_unit", sys.currency_unit},
                 {"emission_unit", sys.emission_unit}};
  doc["time_grid"] = {{"step_count", sys.time_grid.step_count},
                      {"step_hours", sys.time_grid.step_hours},
                      {"start_label", sys.time_grid.start_label}};

  doc["resources"] = json::array();
  for (const auto& r : sys.resources)
    doc["resources"].push_back({{"id", r.id}, {"kind", resource_kind_name(r.kind)}});

  doc["nodes"] = json::array();
  for (const auto& n : sys.topology.nodes)
    doc["nodes"].push_back({{"id", n.id}, {"kind", node_kind_name(n.kind)}});

  doc["edges"] = json::array();
  for (const auto& e : sys.topology.edges) {
    json je = {{"from", e.from}, {"to", e.to}, {"resource", e.resource}};
    if (std::isfinite(e.capacity)) je["capacity"] = e.capacity;
    je["directed"] = e.directed;
    doc["edges"].push_back(std::move(je));
  }

  doc["units"] = json::array();
  for (const auto& u : sys.units) {
    json ju = {{"id", u.id}, {"node", u.node}};
    ju["conversions"] = json::array();
    for (const auto& cv : u.conversions) {
      json jc = {{"input", cv.input},
                 {"output", cv.output},
                 {"breakpoints", dump_curve(cv.curve)}};
      if (!cv.per_step_curves.empty()) {
        json tab = json::array();
        for (const auto& c : cv.per_step_curves) tab.push_back(dump_curve(c));
        jc["per_step_breakpoints"] = std::move(tab);
      }
      ju["conversions"].push_back(std::move(jc));
    }
    ju["min_uptime_steps"] = u.min_uptime_steps;
    ju["min_downtime_steps"] = u.min_downtime_steps;
    if (std::isfinite(u.ramp_up)) ju["ramp_up"] = u.ramp_up;
    if (std::isfinite(u.ramp_down)) ju["ramp_down"] = u.ramp_down;
    if (!u.output_bounds.empty()) {
      json jb = json::object();
      for (const auto& [res, b] : u.output_bounds) jb[res] = dump_bounds(b);
      ju["output_bounds"] = std::move(jb);
    }
    ju["fixed_running_cost"] = u.fixed_running_cost;
    ju["startup_cost"] = u.startup_cost;
    if (!u.variable_cost.empty()) ju["variable_cost"] = u.variable_cost;
    if (!u.emission_factor.empty()) ju["emission_factor"] = u.emission_factor;
    doc["units"].push_back(std::move(ju));
  }

  doc["storages"] = json::array();
  for (const auto& k : sys.storages) {
    json jk = {{"id", k.id},
               {"node", k.node},
               {"resource", k.resource},
               {"loss_factor", k.loss_factor},
               {"load_eff", k.load_eff},
               {"unload_eff", k.unload_eff},
               {"level_bounds", dump_bounds(k.level_bounds)}};
    if (std::isfinite(k.charge_max)) jk["charge_max"] = k.charge_max;
    if (std::isfinite(k.discharge_max)) jk["discharge_max"] = k.discharge_max;
    jk["initial_level"] = k.initial_level;
    jk["cyclic"] = k.cyclic;
    doc["storages"].push_back(std::move(jk));
  }

  // constant price series collapse to scalars, anything else goes to CSV
  struct PriceFile {
    std::string market;
    std::string kind;
    std::string file;
    const std::vector<double>* series;
  };
  std::vector<PriceFile> price_files;
  auto constant_of = [](const std::vector<double>& s) -> std::optional<double> {
    if (s.empty()) return 0.0;
    for (double v : s)
      if (v != s.front()) return std::nullopt;
    return s.front();
  };

  doc["markets"] = json::array();
  for (const auto& m : sys.markets) {
    json jm = {{"id", m.id}, {"node", m.node}, {"resource", m.resource}};
    if (auto c = constant_of(m.purchase_price)) {
      jm["purchase_price"] = *c;
    } else {
      price_files.push_back({m.id, "purchase", m.id + "_purchase.csv",
                             &m.purchase_price});
    }
    if (auto c = constant_of(m.sale_price)) {
      jm["sale_price"] = *c;
    } else {
      price_files.push_back({m.id, "sale", m.id + "_sale.csv", &m.sale_price});
    }
    jm["purchase_bounds"] = dump_bounds(m.purchase_bounds);
    jm["sale_bounds"] = dump_bounds(m.sale_bounds);
    jm["purchase_emission_factor"] = m.purchase_emission_factor;
    doc["markets"].push_back(std::move(jm));
  }

  doc["investments"] = json::array();
  for (const auto& inv : sys.investments) {
    doc["investments"].push_back({{"id", inv.id},
                                  {"enables", inv.enabled_entities},
                                  {"capex", inv.capex},
                                  {"depreciation_years", inv.depreciation_years},
                                  {"annual_fixed_cost", inv.annual_fixed_cost}});
  }

  json refs;
  refs["demand"] = json::array();
  for (const auto& [key, series] : scn.demand) {
    const auto& [node, res] = key;
    const std::string file = "demand_" + node + "_" + res + ".csv";
    write_timeseries_csv(dir / file, series);
    refs["demand"].push_back({{"node", node}, {"resource", res}, {"path", file}});
  }
  refs["market_prices"] = json::array();
  for (const auto& pf : price_files) {
    write_timeseries_csv(dir / pf.file, *pf.series);
    refs["market_prices"].push_back(
        {{"market", pf.market}, {"kind", pf.kind}, {"path", pf.file}});
  }
  doc["series_refs"] = std::move(refs);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scenario '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace dhplan
