#include "dhplan/mps.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dhplan/errors.hpp"

namespace dhplan {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Names longer than this are truncated on export; collisions after
/// truncation are refused.
constexpr size_t kMaxName = 255;

std::string clip(const std::string& name) {
  return name.size() <= kMaxName ? name : name.substr(0, kMaxName);
}

struct ObjRows {
  const LinExpr* active;
  const LinExpr* inactive;
  const char* active_name;
  const char* inactive_name;
};

ObjRows objective_rows(const MilpModel& model, Objective active) {
  if (active == Objective::Cost)
    return {&model.objective_cost(), &model.objective_emissions(), kCostObjRow,
            kEmissionsObjRow};
  return {&model.objective_emissions(), &model.objective_cost(),
          kEmissionsObjRow, kCostObjRow};
}

}  // namespace

void write_mps_stream(const MilpModel& model, std::ostream& os,
                      Objective active,
                      std::span<const LinConstraint> extra_rows) {
  const ObjRows obj = objective_rows(model, active);

  // refuse silently-colliding truncated names
  {
    std::set<std::string> seen;
    std::vector<std::string> offenders;
    auto probe = [&](const std::string& n) {
      if (!seen.insert(clip(n)).second) offenders.push_back(n);
    };
    for (const auto& v : model.variables()) probe(v.name);
    for (const auto& r : model.constraints()) probe(r.name);
    for (const auto& r : extra_rows) probe(r.name);
    if (!offenders.empty()) {
      std::ostringstream msg;
      msg << "name collisions after " << kMaxName << "-char truncation:";
      for (const auto& n : offenders) msg << ' ' << n;
      throw Error(msg.str());
    }
  }

  os << "* dhplan model export\n";
  os << "* rows " << model.num_constraints() + static_cast<int>(extra_rows.size())
     << " cols " << model.num_variables() << " binaries "
     << model.num_binaries() << "\n";
  os << "NAME dhplan\n";
  os << "ROWS\n";
  os << " N " << obj.active_name << "\n";
  os << " N " << obj.inactive_name << "\n";
  auto row_type = [](Sense s) {
    switch (s) {
      case Sense::LE: return 'L';
      case Sense::GE: return 'G';
      case Sense::EQ: return 'E';
    }
    return 'E';
  };
  for (const auto& r : model.constraints())
    os << ' ' << row_type(r.sense) << ' ' << clip(r.name) << "\n";
  for (const auto& r : extra_rows)
    os << ' ' << row_type(r.sense) << ' ' << clip(r.name) << "\n";

  // gather per-column entries in deterministic order: objectives first,
  // then constraint rows in model order
  const int n = model.num_variables();
  std::vector<std::vector<std::pair<std::string, double>>> entries(
      static_cast<size_t>(n));
  for (const auto& t : obj.active->terms)
    entries[static_cast<size_t>(t.var)].push_back({obj.active_name, t.coef});
  for (const auto& t : obj.inactive->terms)
    entries[static_cast<size_t>(t.var)].push_back({obj.inactive_name, t.coef});
  auto gather = [&](const LinConstraint& r) {
    for (const auto& t : r.terms)
      entries[static_cast<size_t>(t.var)].push_back({clip(r.name), t.coef});
  };
  for (const auto& r : model.constraints()) gather(r);
  for (const auto& r : extra_rows) gather(r);

  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (const auto& v : model.variables()) {
    const bool want_int = v.kind == VarKind::Binary;
    if (want_int != in_int) {
      os << "    MARKER" << marker++ << " 'MARKER' "
         << (want_int ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = want_int;
    }
    const auto& es = entries[static_cast<size_t>(v.index)];
    if (es.empty()) {
      // keep empty columns discoverable by the reader
      os << "    " << clip(v.name) << ' ' << obj.active_name << " 0\n";
      continue;
    }
    for (const auto& [row, coef] : es)
      os << "    " << clip(v.name) << ' ' << row << ' ' << num(coef) << "\n";
  }
  if (in_int) os << "    MARKER" << marker++ << " 'MARKER' 'INTEND'\n";

  os << "RHS\n";
  if (obj.active->constant != 0.0)
    os << "    RHS " << obj.active_name << ' ' << num(-obj.active->constant)
       << "\n";
  if (obj.inactive->constant != 0.0)
    os << "    RHS " << obj.inactive_name << ' ' << num(-obj.inactive->constant)
       << "\n";
  for (const auto& r : model.constraints())
    if (r.rhs != 0.0) os << "    RHS " << clip(r.name) << ' ' << num(r.rhs) << "\n";
  for (const auto& r : extra_rows)
    if (r.rhs != 0.0) os << "    RHS " << clip(r.name) << ' ' << num(r.rhs) << "\n";

  os << "BOUNDS\n";
  for (const auto& v : model.variables()) {
    const std::string name = clip(v.name);
    if (v.kind == VarKind::Binary) {
      os << " BV BND " << name << "\n";
      continue;
    }
    const bool lo_fin = std::isfinite(v.lower);
    const bool hi_fin = std::isfinite(v.upper);
    if (lo_fin && hi_fin && v.lower == v.upper) {
      os << " FX BND " << name << ' ' << num(v.lower) << "\n";
      continue;
    }
    if (!lo_fin && !hi_fin) {
      os << " FR BND " << name << "\n";
      continue;
    }
    if (!lo_fin) {
      os << " MI BND " << name << "\n";
    } else if (v.lower != 0.0) {
      os << " LO BND " << name << ' ' << num(v.lower) << "\n";
    }
    if (hi_fin) os << " UP BND " << name << ' ' << num(v.upper) << "\n";
  }
  os << "ENDATA\n";
}

std::int64_t write_mps(const MilpModel& model, const std::filesystem::path& path,
                       Objective active,
                       std::span<const LinConstraint> extra_rows) {
  std::ostringstream buf;
  write_mps_stream(model, buf, active, extra_rows);
  const std::string text = buf.str();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
  return static_cast<std::int64_t>(text.size());
}

namespace {

struct RowInfo {
  char type = 'E';
  int index = -1;  // constraint index; -1 for free rows
};

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_num(const std::string& s, size_t line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("malformed number '" + s + "'", line_no);
  }
}

}  // namespace

MpsReadResult read_mps_stream(std::istream& is, const std::string& origin) {
  enum class Section { None, Rows, Columns, Rhs, Ranges, Bounds, Done };
  Section section = Section::None;

  MpsReadResult out;
  MilpModel& model = out.model;

  std::map<std::string, RowInfo> rows;
  std::vector<std::string> free_rows;  // in declaration order
  std::vector<LinConstraint> cons;
  std::map<std::string, int> var_index;
  struct VarData {
    std::string name;
    bool integer = false;
    double lo = 0.0;
    double hi = kInf;
    bool lo_set = false, hi_set = false;
    std::vector<std::pair<int, double>> terms;          // into cons
    std::map<std::string, double> obj_terms;            // free-row name -> coef
  };
  std::vector<VarData> vars;
  std::map<std::string, double> free_row_rhs;
  bool in_integer = false;

  std::string line;
  size_t line_no = 0;
  bool saw_endata = false;

  auto lookup_row = [&](const std::string& name, size_t ln) -> RowInfo& {
    auto it = rows.find(name);
    if (it == rows.end())
      throw ParseError("reference to undeclared row '" + name + "'", ln);
    return it->second;
  };
  auto lookup_var = [&](const std::string& name) -> VarData& {
    auto it = var_index.find(name);
    if (it == var_index.end()) {
      const int idx = static_cast<int>(vars.size());
      var_index.emplace(name, idx);
      vars.push_back(VarData{name, in_integer, 0.0, in_integer ? 1.0 : kInf,
                             false, false, {}, {}});
      return vars.back();
    }
    return vars[static_cast<size_t>(it->second)];
  };

  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    // comment lines
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '*') continue;

    const bool header = first == 0;
    auto toks = tokenize(line);
    if (toks.empty()) continue;

    if (header) {
      const std::string& kw = toks[0];
      if (kw == "NAME") {
        continue;
      } else if (kw == "OBJSENSE") {
        // argument may follow on the same or the next line
        if (toks.size() > 1 && toks[1] != "MIN" && toks[1] != "MINIMIZE")
          throw ParseError("only minimization is supported", line_no);
        continue;
      } else if (kw == "MIN" || kw == "MINIMIZE") {
        continue;
      } else if (kw == "ROWS") {
        section = Section::Rows;
      } else if (kw == "COLUMNS") {
        section = Section::Columns;
      } else if (kw == "RHS") {
        section = Section::Rhs;
      } else if (kw == "RANGES") {
        section = Section::Ranges;
      } else if (kw == "BOUNDS") {
        section = Section::Bounds;
      } else if (kw == "ENDATA") {
        section = Section::Done;
        saw_endata = true;
        break;
      } else {
        throw ParseError("unknown section '" + kw + "' in " + origin, line_no);
      }
      continue;
    }

    switch (section) {
      case Section::None:
        throw ParseError("data before any section header", line_no);
      case Section::Rows: {
        if (toks.size() != 2)
          throw ParseError("ROWS record needs '<type> <name>'", line_no);
        const std::string& type = toks[0];
        const std::string& name = toks[1];
        if (rows.count(name))
          throw ParseError("duplicate row '" + name + "'", line_no);
        if (type == "N") {
          if (free_rows.size() >= 2)
            throw ParseError("more than two free (N) rows are not supported",
                             line_no);
          rows[name] = {'N', -1};
          free_rows.push_back(name);
        } else if (type == "E" || type == "L" || type == "G") {
          LinConstraint c;
          c.name = name;
          c.sense = type == "E" ? Sense::EQ : type == "L" ? Sense::LE : Sense::GE;
          c.rhs = 0.0;
          rows[name] = {type[0], static_cast<int>(cons.size())};
          cons.push_back(std::move(c));
        } else {
          throw ParseError("unknown row type '" + type + "'", line_no);
        }
        break;
      }
      case Section::Columns: {
        if (toks.size() >= 3 && toks[1] == "'MARKER'") {
          if (toks[2] == "'INTORG'") in_integer = true;
          else if (toks[2] == "'INTEND'") in_integer = false;
          else throw ParseError("unknown marker '" + toks[2] + "'", line_no);
          break;
        }
        if (toks.size() < 3 || (toks.size() - 1) % 2 != 0)
          throw ParseError("COLUMNS record needs '<col> (<row> <value>)+'",
                           line_no);
        VarData& v = lookup_var(toks[0]);
        for (size_t k = 1; k + 1 < toks.size(); k += 2) {
          const double coef = parse_num(toks[k + 1], line_no);
          const RowInfo& ri = lookup_row(toks[k], line_no);
          if (ri.type == 'N')
            v.obj_terms[toks[k]] += coef;
          else
            v.terms.push_back({ri.index, coef});
        }
        break;
      }
      case Section::Rhs: {
        // odd token count carries a leading set name
        size_t start = toks.size() % 2 == 1 ? 1 : 0;
        if (toks.size() < start + 2)
          throw ParseError("RHS record needs '<row> <value>' pairs", line_no);
        for (size_t k = start; k + 1 < toks.size(); k += 2) {
          const double val = parse_num(toks[k + 1], line_no);
          const RowInfo& ri = lookup_row(toks[k], line_no);
          if (ri.type == 'N')
            free_row_rhs[toks[k]] = val;
          else
            cons[static_cast<size_t>(ri.index)].rhs = val;
        }
        break;
      }
      case Section::Ranges: {
        size_t start = toks.size() % 2 == 1 ? 1 : 0;
        if (toks.size() < start + 2)
          throw ParseError("RANGES record needs '<row> <value>' pairs", line_no);
        for (size_t k = start; k + 1 < toks.size(); k += 2) {
          const double val = parse_num(toks[k + 1], line_no);
          RowInfo& ri = lookup_row(toks[k], line_no);
          if (ri.type == 'N')
            throw ParseError("range on free row '" + toks[k] + "'", line_no);
          LinConstraint& base = cons[static_cast<size_t>(ri.index)];
          // widen to an interval: emit the second side as an extra row
          LinConstraint other = base;
          other.name = base.name + ".rng";
          if (ri.type == 'L') {
            other.sense = Sense::GE;
            other.rhs = base.rhs - std::abs(val);
          } else if (ri.type == 'G') {
            other.sense = Sense::LE;
            other.rhs = base.rhs + std::abs(val);
          } else {  // E
            other.sense = val >= 0 ? Sense::LE : Sense::GE;
            other.rhs = base.rhs + val;
            base.sense = val >= 0 ? Sense::GE : Sense::LE;
          }
          rows[other.name] = {other.sense == Sense::LE ? 'L' : 'G',
                              static_cast<int>(cons.size())};
          // duplicate the terms of the base row for the paired side
          for (auto& v : vars) {
            std::vector<std::pair<int, double>> extra;
            for (const auto& [ci, coef] : v.terms)
              if (ci == ri.index)
                extra.push_back({static_cast<int>(cons.size()), coef});
            v.terms.insert(v.terms.end(), extra.begin(), extra.end());
          }
          cons.push_back(std::move(other));
        }
        break;
      }
      case Section::Bounds: {
        if (toks.empty()) break;
        const std::string& type = toks[0];
        const bool valued = type == "UP" || type == "LO" || type == "FX" ||
                            type == "UI" || type == "LI";
        const bool unvalued = type == "FR" || type == "MI" || type == "PL" ||
                              type == "BV";
        if (!valued && !unvalued)
          throw ParseError("unknown bound type '" + type + "'", line_no);
        std::string col;
        double val = 0.0;
        if (valued) {
          if (toks.size() == 4) {
            col = toks[2];
            val = parse_num(toks[3], line_no);
          } else if (toks.size() == 3) {
            col = toks[1];
            val = parse_num(toks[2], line_no);
          } else {
            throw ParseError("malformed bound record", line_no);
          }
        } else {
          if (toks.size() == 3) col = toks[2];
          else if (toks.size() == 2) col = toks[1];
          else throw ParseError("malformed bound record", line_no);
        }
        auto it = var_index.find(col);
        if (it == var_index.end())
          throw ParseError("bound on unknown column '" + col + "'", line_no);
        VarData& v = vars[static_cast<size_t>(it->second)];
        if (type == "UP" || type == "UI") {
          v.hi = val;
          v.hi_set = true;
          // classic MPS quirk: a negative upper bound on a default-lower
          // column pulls the lower bound to -inf
          if (val < 0 && !v.lo_set) v.lo = -kInf;
        } else if (type == "LO" || type == "LI") {
          v.lo = val;
          v.lo_set = true;
        } else if (type == "FX") {
          v.lo = v.hi = val;
          v.lo_set = v.hi_set = true;
        } else if (type == "FR") {
          v.lo = -kInf;
          v.hi = kInf;
          v.lo_set = v.hi_set = true;
        } else if (type == "MI") {
          v.lo = -kInf;
          v.lo_set = true;
        } else if (type == "PL") {
          v.hi = kInf;
          v.hi_set = true;
        } else if (type == "BV") {
          v.integer = true;
          v.lo = 0.0;
          v.hi = 1.0;
          v.lo_set = v.hi_set = true;
        }
        break;
      }
      case Section::Done:
        break;
    }
  }

  if (!saw_endata)
    throw ParseError("missing ENDATA in " + origin, line_no);
  if (free_rows.empty())
    throw ParseError("no objective (N) row declared in " + origin, line_no);

  // integer columns must come out binary; that is all the solver handles
  for (auto& v : vars) {
    if (v.integer && (v.lo < 0.0 || v.hi > 1.0))
      throw ParseError("integer column '" + v.name +
                       "' is not binary; general integers are unsupported");
  }

  for (const auto& v : vars)
    model.add_variable(v.name, v.integer ? VarKind::Binary : VarKind::Continuous,
                       v.lo, v.hi);

  std::vector<std::vector<LinTerm>> row_terms(cons.size());
  for (size_t vi = 0; vi < vars.size(); ++vi)
    for (const auto& [ci, coef] : vars[vi].terms)
      row_terms[static_cast<size_t>(ci)].push_back({static_cast<int>(vi), coef});
  for (size_t ci = 0; ci < cons.size(); ++ci) {
    LinConstraint row;
    row.name = cons[ci].name;
    row.sense = cons[ci].sense;
    row.rhs = cons[ci].rhs;
    row.terms = std::move(row_terms[ci]);
    if (row.terms.empty())
      throw ParseError("row '" + row.name + "' has no coefficients in " + origin);
    model.add_constraint(std::move(row));
  }

  // objective slots by row name; unknown names fall back to order
  auto build_obj = [&](const std::string& row_name) {
    LinExpr e;
    for (size_t vi = 0; vi < vars.size(); ++vi) {
      auto it = vars[vi].obj_terms.find(row_name);
      if (it != vars[vi].obj_terms.end() && it->second != 0.0)
        e.terms.push_back({static_cast<int>(vi), it->second});
    }
    auto rit = free_row_rhs.find(row_name);
    if (rit != free_row_rhs.end()) e.constant = -rit->second;
    return e;
  };

  const std::string& first = free_rows[0];
  const std::string second = free_rows.size() > 1 ? free_rows[1] : "";
  LinExpr first_expr = build_obj(first);
  LinExpr second_expr = second.empty() ? LinExpr{} : build_obj(second);

  if (first == kEmissionsObjRow) {
    out.active = Objective::Emissions;
    model.set_objective_emissions(std::move(first_expr));
    model.set_objective_cost(std::move(second_expr));
  } else {
    out.active = Objective::Cost;
    model.set_objective_cost(std::move(first_expr));
    model.set_objective_emissions(std::move(second_expr));
  }
  return out;
}

MpsReadResult read_mps(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_mps_stream(in, path.string());
}

}  // namespace dhplan
