#ifndef DHPLAN_SYNTHETIC_HPP
#define DHPLAN_SYNTHETIC_HPP

#include <cstdint>
#include <utility>

#include "dhplan/system.hpp"

namespace dhplan {

struct SyntheticSpec {
  int regions = 1;
  int units_per_region = 1;
  int invest_count = 0;
  int steps = 24;
  std::uint64_t seed = 0;
};

/// Deterministic district-heating-style instance: per region a demand
/// node fed through a balance node, shared fuel and power side nodes,
/// CHP-style two-output units and heating-station-style one-output
/// units sized to roughly a 43/57 heating-station/CHP capacity split,
/// bidirectional heat links between neighbouring regions, one heat
/// storage per region and a configurable list of investment candidates.
/// Output always passes validate_system.
std::pair<MultiEnergySystem, Scenario> generate_synthetic_instance(
    const SyntheticSpec& spec);

}  // namespace dhplan

#endif
