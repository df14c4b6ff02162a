#ifndef DHPLAN_SCENARIO_IO_HPP
#define DHPLAN_SCENARIO_IO_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dhplan/system.hpp"

namespace dhplan {

/// Parses the scenario JSON document and its referenced CSV series,
/// schema-checks it and validates the result. Structural problems raise
/// ParseError with a JSON-pointer-ish path; semantic problems come back
/// as the validate_system diagnostics.
struct LoadedScenario {
  MultiEnergySystem system;
  Scenario scenario;
  std::vector<Diagnostic> diagnostics;  // nonempty = rejectable input
};
LoadedScenario load_scenario(const std::filesystem::path& path);

/// Serializes (sys, scn) as a scenario document at `path`, writing the
/// demand and price series as CSV files next to it. Inverse of
/// load_scenario for generator output.
void save_scenario(const MultiEnergySystem& sys, const Scenario& scn,
                   const std::filesystem::path& path);

/// CSV with header `t,value`; steps 0..expected_len-1 exactly once.
std::vector<double> load_timeseries_csv(const std::filesystem::path& path,
                                        int expected_len);

void write_timeseries_csv(const std::filesystem::path& path,
                          const std::vector<double>& series);

}  // namespace dhplan

#endif
