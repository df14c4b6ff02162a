#ifndef DHPLAN_REPORTS_HPP
#define DHPLAN_REPORTS_HPP

#include <filesystem>

#include "dhplan/pareto.hpp"

namespace dhplan {

struct ReportBundle {
  std::filesystem::path catalog_json;
  std::filesystem::path pareto_csv;
  std::filesystem::path investments_csv;
  std::filesystem::path plot_csv;
};

/// Writes catalog.json, pareto.csv, investments.csv (Table-1-shaped
/// selection matrix with a trailing classification column) and plot.csv
/// into `out_dir`. Numbers carry 6 significant digits.
ReportBundle emit_reports(const SolutionCatalog& catalog,
                          const std::filesystem::path& out_dir,
                          const std::string& currency_unit = "EUR",
                          const std::string& emission_unit = "tCO2");

/// Re-reads a catalog.json report (round-trip of emit_reports).
SolutionCatalog read_catalog_json(const std::filesystem::path& path);

}  // namespace dhplan

#endif
