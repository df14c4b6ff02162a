#ifndef DHPLAN_MPS_HPP
#define DHPLAN_MPS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "dhplan/milp.hpp"

namespace dhplan {

/// Row names used for the two objectives. The active objective is
/// written first; the inactive one rides along as a second free row so
/// a sweep can re-activate it without rebuilding the model.
inline constexpr const char* kCostObjRow = "OBJ.COST";
inline constexpr const char* kEmissionsObjRow = "OBJ.EMIS";

/// Free-format MPS with ROWS/COLUMNS/RHS/RANGES/BOUNDS sections;
/// binaries inside INTORG/INTEND markers with BV bounds. Deterministic
/// ordering. `extra_rows` (e.g. a cost cap) are appended after the
/// model rows. Returns bytes written.
std::int64_t write_mps(const MilpModel& model, const std::filesystem::path& path,
                       Objective active = Objective::Cost,
                       std::span<const LinConstraint> extra_rows = {});

void write_mps_stream(const MilpModel& model, std::ostream& os,
                      Objective active = Objective::Cost,
                      std::span<const LinConstraint> extra_rows = {});

struct MpsReadResult {
  MilpModel model;
  Objective active = Objective::Cost;
};

/// Inverse of write_mps up to naming. Unknown sections and malformed
/// records raise ParseError with a line number.
MpsReadResult read_mps(const std::filesystem::path& path);
MpsReadResult read_mps_stream(std::istream& is, const std::string& origin = "<stream>");

}  // namespace dhplan

#endif
