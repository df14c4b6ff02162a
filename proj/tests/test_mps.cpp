#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>

#include "dhplan/errors.hpp"
#include "dhplan/mps.hpp"
#include "dhplan/solver.hpp"
#include "toy_models.hpp"

using namespace dhplan;

namespace {

std::string write_to_string(const MilpModel& m,
                            Objective active = Objective::Cost) {
  std::ostringstream os;
  write_mps_stream(m, os, active);
  return os.str();
}

MpsReadResult read_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_mps_stream(is, "<test>");
}

std::map<std::pair<std::string, std::string>, double> coefficient_map(
    const MilpModel& m) {
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& r : m.constraints())
    for (const auto& t : r.terms)
      out[{r.name, m.variable(t.var).name}] += t.coef;
  for (const auto& t : m.objective_cost().terms)
    out[{"<cost>", m.variable(t.var).name}] += t.coef;
  for (const auto& t : m.objective_emissions().terms)
    out[{"<emis>", m.variable(t.var).name}] += t.coef;
  return out;
}

bool same_bound(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

void check_equal_models(const MilpModel& a, const MilpModel& b) {
  REQUIRE(a.num_variables() == b.num_variables());
  REQUIRE(a.num_constraints() == b.num_constraints());
  for (int j = 0; j < a.num_variables(); ++j) {
    const VarRef& va = a.variable(j);
    const VarRef& vb = b.variable(j);
    CHECK(va.name == vb.name);
    CHECK(va.kind == vb.kind);
    CHECK(same_bound(va.lower, vb.lower));
    CHECK(same_bound(va.upper, vb.upper));
  }
  const auto ca = coefficient_map(a);
  const auto cb = coefficient_map(b);
  REQUIRE(ca.size() == cb.size());
  for (const auto& [key, va] : ca) {
    auto it = cb.find(key);
    REQUIRE(it != cb.end());
    CHECK(std::abs(va - it->second) <= 1e-12 * std::max(1.0, std::abs(va)));
  }
  for (size_t r = 0; r < a.constraints().size(); ++r) {
    CHECK(a.constraints()[r].sense == b.constraints()[r].sense);
    CHECK(a.constraints()[r].rhs ==
          doctest::Approx(b.constraints()[r].rhs).epsilon(1e-12));
  }
}

/// Random models with binaries, negative/infinite/fixed bounds and both
/// objectives.
MilpModel random_model(std::uint64_t seed) {
  std::uint64_t state = seed * 0x9e3779b97f4a7c15ull + 1;
  auto next = [&]() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  auto uni = [&]() { return static_cast<double>(next() >> 11) * 0x1.0p-53; };

  toy::ModelSpec s;
  const int n = 3 + static_cast<int>(next() % 10);
  for (int j = 0; j < n; ++j) {
    const double r = uni();
    if (r < 0.3) {
      s.bin("b" + std::to_string(j));
    } else {
      double lo = uni() < 0.2 ? -kInf : -5.0 + 10.0 * uni();
      double hi =
          uni() < 0.3 ? kInf : (std::isfinite(lo) ? lo : 0.0) + 8.0 * uni();
      if (uni() < 0.1 && std::isfinite(lo)) hi = lo;  // fixed var
      s.cont("x" + std::to_string(j), lo, hi);
    }
  }
  const int m = 2 + static_cast<int>(next() % 8);
  for (int i = 0; i < m; ++i) {
    std::vector<LinTerm> terms;
    for (int j = 0; j < n; ++j)
      if (uni() < 0.5) terms.push_back({j, -4.0 + 8.0 * uni()});
    if (terms.empty()) terms.push_back({static_cast<int>(next() % n), 1.0});
    s.row("r" + std::to_string(i),
          i % 3 == 0 ? Sense::EQ : (i % 3 == 1 ? Sense::LE : Sense::GE),
          -10.0 + 30.0 * uni(), std::move(terms));
  }
  std::vector<LinTerm> cost, emis;
  for (int j = 0; j < n; ++j) {
    if (uni() < 0.7) cost.push_back({j, -5.0 + 10.0 * uni()});
    if (uni() < 0.4) emis.push_back({j, 3.0 * uni()});
  }
  s.cost(std::move(cost), uni() < 0.3 ? 2.5 : 0.0);
  s.emissions(std::move(emis));
  return std::move(s.model);
}

}  // namespace

TEST_CASE("mps: toy model round trip is structurally identical") {
  auto [sys, scn] = toy::unit_market_edge(2, 5.0);
  MilpModel m = assemble(sys, scn);
  const MpsReadResult back = read_from_string(write_to_string(m));
  CHECK(back.active == Objective::Cost);
  check_equal_models(m, back.model);
}

TEST_CASE("mps: binaries sit inside INTORG/INTEND with BV bounds") {
  auto [sys, scn] = toy::clean_vs_dirty(2);
  MilpModel m = assemble(sys, scn);
  const std::string text = write_to_string(m);
  const size_t org = text.find("'INTORG'");
  const size_t end = text.rfind("'INTEND'");
  const size_t zinv = text.find("zinv[clean_inv]");
  REQUIRE(org != std::string::npos);
  REQUIRE(end != std::string::npos);
  REQUIRE(zinv != std::string::npos);
  CHECK(org < zinv);
  CHECK(zinv < end);
  CHECK(text.find(" BV BND zinv[clean_inv]") != std::string::npos);
}

TEST_CASE("mps: emissions-active export swaps the leading free row") {
  auto [sys, scn] = toy::unit_market_edge(2, 5.0);
  MilpModel m = assemble(sys, scn);
  const std::string text = write_to_string(m, Objective::Emissions);
  CHECK(text.find(" N OBJ.EMIS") < text.find(" N OBJ.COST"));
  const MpsReadResult back = read_from_string(text);
  CHECK(back.active == Objective::Emissions);
  check_equal_models(m, back.model);
}

TEST_CASE("mps: missing RHS section defaults every rhs to zero") {
  const std::string text =
      "NAME t\n"
      "ROWS\n"
      " N OBJ\n"
      " L r1\n"
      "COLUMNS\n"
      "    x OBJ 1 r1 2\n"
      "BOUNDS\n"
      " UP BND x 9\n"
      "ENDATA\n";
  const MpsReadResult back = read_from_string(text);
  REQUIRE(back.model.num_constraints() == 1);
  CHECK(back.model.constraints()[0].rhs == 0.0);
}

TEST_CASE("mps: garbage in COLUMNS names the line") {
  const std::string text =
      "NAME t\n"
      "ROWS\n"
      " N OBJ\n"
      " L r1\n"
      "COLUMNS\n"
      "    x r1 notanumber\n"
      "ENDATA\n";
  try {
    read_from_string(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 6);
  }
}

TEST_CASE("mps: unknown section rejected with position") {
  const std::string text =
      "NAME t\n"
      "ROWS\n"
      " N OBJ\n"
      "SOS\n"
      "ENDATA\n";
  try {
    read_from_string(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).find("SOS") != std::string::npos);
  }
}

TEST_CASE("mps: undeclared row reference and missing ENDATA are errors") {
  CHECK_THROWS_AS(
      read_from_string(
          "NAME t\nROWS\n N OBJ\nCOLUMNS\n    x ghost 1\nENDATA\n"),
      ParseError);
  CHECK_THROWS_AS(read_from_string("NAME t\nROWS\n N OBJ\n"), ParseError);
}

TEST_CASE("mps: general integer columns are rejected") {
  const std::string text =
      "NAME t\n"
      "ROWS\n"
      " N OBJ\n"
      " L r1\n"
      "COLUMNS\n"
      "    MARKER0 'MARKER' 'INTORG'\n"
      "    x OBJ 1 r1 1\n"
      "    MARKER1 'MARKER' 'INTEND'\n"
      "RHS\n"
      "    RHS r1 5\n"
      "BOUNDS\n"
      " UP BND x 7\n"
      "ENDATA\n";
  CHECK_THROWS_AS(read_from_string(text), ParseError);
}

TEST_CASE("mps: round trip preserves 20 randomized models") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    MilpModel m = random_model(seed);
    const MpsReadResult back = read_from_string(write_to_string(m));
    check_equal_models(m, back.model);
  }
}

TEST_CASE("mps: ranged rows split into two one-sided constraints") {
  const std::string text =
      "NAME t\n"
      "ROWS\n"
      " N OBJ\n"
      " L r1\n"
      "COLUMNS\n"
      "    x OBJ 1 r1 1\n"
      "RHS\n"
      "    RHS r1 8\n"
      "RANGES\n"
      "    RNG r1 3\n"
      "BOUNDS\n"
      "ENDATA\n";
  const MpsReadResult back = read_from_string(text);
  REQUIRE(back.model.num_constraints() == 2);
  CHECK(back.model.constraints()[0].sense == Sense::LE);
  CHECK(back.model.constraints()[0].rhs == 8.0);
  CHECK(back.model.constraints()[1].sense == Sense::GE);
  CHECK(back.model.constraints()[1].rhs == 5.0);
}

TEST_CASE("mps: extra rows ride along after the model rows") {
  auto [sys, scn] = toy::unit_market_edge(1, 5.0);
  MilpModel m = assemble(sys, scn);
  LinConstraint cap;
  cap.name = "costcap";
  cap.sense = Sense::LE;
  cap.rhs = 123.0;
  cap.terms = m.objective_cost().terms;
  std::ostringstream os;
  write_mps_stream(m, os, Objective::Emissions, {&cap, 1});
  const std::string text = os.str();
  CHECK(text.find(" L costcap") != std::string::npos);
  const MpsReadResult back = read_from_string(text);
  CHECK(back.model.num_constraints() == m.num_constraints() + 1);
}
