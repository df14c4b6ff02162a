#include "dhplan/reports.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dhplan/errors.hpp"

namespace dhplan {

namespace {

using json = nlohmann::ordered_json;

/// Report numbers carry 6 significant digits.
std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string step_label(double step) {
  std::ostringstream os;
  os << g6(step);
  return os.str();
}

InvestmentClass class_from_string(const std::string& s) {
  if (s == "robust") return InvestmentClass::Robust;
  if (s == "target-dependent") return InvestmentClass::TargetDependent;
  if (s == "rejected") return InvestmentClass::Rejected;
  throw ParseError("unknown classification '" + s + "'");
}

std::string status_name(SolveStatus s) { return to_string(s); }

SolveStatus status_from_string(const std::string& s) {
  if (s == "optimal") return SolveStatus::Optimal;
  if (s == "infeasible") return SolveStatus::Infeasible;
  if (s == "unbounded") return SolveStatus::Unbounded;
  if (s == "gap_reached") return SolveStatus::GapReached;
  if (s == "limit_reached") return SolveStatus::LimitReached;
  throw ParseError("unknown status '" + s + "'");
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write report '" + p.string() + "'");
  return out;
}

}  // namespace

ReportBundle emit_reports(const SolutionCatalog& catalog,
                          const std::filesystem::path& out_dir,
                          const std::string& currency_unit,
                          const std::string& emission_unit) {
  if (catalog.points.empty()) throw Error("catalog has no points to report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec && !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create report directory '" + out_dir.string() + "'");

  ReportBundle bundle;
  bundle.catalog_json = out_dir / "catalog.json";
  bundle.pareto_csv = out_dir / "pareto.csv";
  bundle.investments_csv = out_dir / "investments.csv";
  bundle.plot_csv = out_dir / "plot.csv";

  {
    json doc;
    doc["units"] = {{"currency", currency_unit}, {"emissions", emission_unit}};
    doc["anchor_cost"] = catalog.anchor_cost;
    doc["anchor_emissions"] = catalog.anchor_emissions;
    doc["investments"] = catalog.investment_ids;
    doc["points"] = json::array();
    for (const auto& p : catalog.points) {
      json jp = {{"step", p.step},
                 {"cost", p.cost},
                 {"emissions", p.emissions},
                 {"normalized_cost", p.normalized_cost},
                 {"normalized_emissions", p.normalized_emissions},
                 {"investment_vector", p.investment_vector},
                 {"status", status_name(p.status)},
                 {"rel_gap", std::isfinite(p.rel_gap) ? p.rel_gap : -1.0},
                 {"node_count", p.node_count},
                 {"wall_time", p.wall_time}};
      if (!p.fragile_investments.empty())
        jp["fragile_investments"] = p.fragile_investments;
      if (!p.failure.empty()) jp["failure"] = p.failure;
      doc["points"].push_back(std::move(jp));
    }
    json cls = json::object();
    for (const auto& [id, c] : catalog.classification) cls[id] = to_string(c);
    doc["classification"] = std::move(cls);
    auto out = open_out(bundle.catalog_json);
    out << doc.dump(2) << '\n';
  }

  {
    auto out = open_out(bundle.pareto_csv);
    out << "step,cost,emissions,normalized_cost,normalized_emissions\n";
    for (const auto& p : catalog.points)
      out << g6(p.step) << ',' << g6(p.cost) << ',' << g6(p.emissions) << ','
          << g6(p.normalized_cost) << ',' << g6(p.normalized_emissions) << '\n';
  }

  {
    auto out = open_out(bundle.investments_csv);
    out << "investment";
    for (const auto& p : catalog.points) out << ',' << step_label(p.step);
    out << ",classification\n";
    for (size_t i = 0; i < catalog.investment_ids.size(); ++i) {
      const std::string& id = catalog.investment_ids[i];
      out << id;
      for (const auto& p : catalog.points) {
        if (i < p.investment_vector.size())
          out << ',' << p.investment_vector[i];
        else
          out << ',';  // failed point: no selection known
      }
      auto it = catalog.classification.find(id);
      out << ',' << (it != catalog.classification.end() ? to_string(it->second) : "")
          << '\n';
    }
  }

  {
    auto out = open_out(bundle.plot_csv);
    out << "normalized_cost,normalized_emissions\n";
    for (const auto& p : catalog.points)
      if (p.failure.empty())
        out << g6(p.normalized_cost) << ',' << g6(p.normalized_emissions) << '\n';
  }

  return bundle;
}

SolutionCatalog read_catalog_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open catalog '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("catalog '" + path.string() + "': " + e.what());
  }

  SolutionCatalog cat;
  cat.anchor_cost = doc.at("anchor_cost").get<double>();
  cat.anchor_emissions = doc.value("anchor_emissions", 0.0);
  for (const auto& id : doc.at("investments"))
    cat.investment_ids.push_back(id.get<std::string>());
  for (const auto& jp : doc.at("points")) {
    ParetoPoint p;
    p.step = jp.at("step").get<double>();
    p.cost = jp.at("cost").get<double>();
    p.emissions = jp.at("emissions").get<double>();
    p.normalized_cost = jp.value("normalized_cost", 0.0);
    p.normalized_emissions = jp.value("normalized_emissions", 0.0);
    for (const auto& v : jp.at("investment_vector"))
      p.investment_vector.push_back(v.get<int>());
    p.status = status_from_string(jp.value("status", "optimal"));
    const double gap = jp.value("rel_gap", -1.0);
    p.rel_gap = gap < 0 ? kInf : gap;
    p.node_count = jp.value("node_count", 0L);
    p.wall_time = jp.value("wall_time", 0.0);
    p.failure = jp.value("failure", "");
    cat.points.push_back(std::move(p));
  }
  if (auto it = doc.find("classification"); it != doc.end())
    for (auto c = it->begin(); c != it->end(); ++c)
      cat.classification[c.key()] = class_from_string(c.value().get<std::string>());
  return cat;
}

}  // namespace dhplan
