#include "dhplan/milp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dhplan/errors.hpp"

namespace dhplan {

double LinExpr::evaluate(std::span<const double> x) const {
  double v = constant;
  for (const auto& t : terms) v += t.coef * x[static_cast<size_t>(t.var)];
  return v;
}

int MilpModel::add_variable(std::string name, VarKind kind, double lower,
                            double upper) {
  const int idx = static_cast<int>(vars_.size());
  auto [it, inserted] = var_by_name_.emplace(name, idx);
  if (!inserted)
    throw Error("duplicate variable name '" + name + "'");
  vars_.push_back(VarRef{idx, std::move(name), kind, lower, upper});
  return idx;
}

int MilpModel::add_constraint(LinConstraint row) {
  if (row.terms.empty())
    throw Error("constraint '" + row.name + "' has no terms");
  rows_.push_back(std::move(row));
  return static_cast<int>(rows_.size()) - 1;
}

int MilpModel::find_variable(const std::string& name) const {
  auto it = var_by_name_.find(name);
  return it == var_by_name_.end() ? -1 : it->second;
}

int MilpModel::num_binaries() const {
  int n = 0;
  for (const auto& v : vars_)
    if (v.kind == VarKind::Binary) ++n;
  return n;
}

std::int64_t MilpModel::num_nonzeros() const {
  std::int64_t n = 0;
  for (const auto& r : rows_) n += static_cast<std::int64_t>(r.terms.size());
  return n;
}

std::vector<Diagnostic> MilpModel::self_check() const {
  std::vector<Diagnostic> out;
  const int n = num_variables();
  for (const auto& v : vars_) {
    if (!(v.lower <= v.upper))
      out.push_back({v.name, "var-bounds", "lower > upper"});
    if (v.kind == VarKind::Binary && (v.lower < 0 || v.upper > 1))
      out.push_back({v.name, "binary-bounds", "binary bounds outside [0,1]"});
  }
  for (const auto& r : rows_) {
    for (const auto& t : r.terms) {
      if (t.var < 0 || t.var >= n) {
        out.push_back({r.name, "dangling-term", "term references variable #" +
                                                    std::to_string(t.var)});
        continue;
      }
      if (!std::isfinite(t.coef))
        out.push_back({r.name, "coef-finite", "non-finite coefficient"});
    }
    if (!std::isfinite(r.rhs))
      out.push_back({r.name, "rhs-finite", "non-finite rhs"});
  }
  auto check_expr = [&](const LinExpr& e, const char* tag) {
    for (const auto& t : e.terms)
      if (t.var < 0 || t.var >= n)
        out.push_back({tag, "dangling-term",
                       "objective references variable #" + std::to_string(t.var)});
  };
  check_expr(objective_cost_, "objective_cost");
  check_expr(objective_emissions_, "objective_emissions");
  return out;
}

namespace var_name {

namespace {
std::string tag3(const char* tag, const std::string& a, const std::string& b,
                 int t) {
  std::ostringstream os;
  os << tag << '[' << a << ',' << b << ',' << t << ']';
  return os.str();
}
std::string tag2(const char* tag, const std::string& a, int t) {
  std::ostringstream os;
  os << tag << '[' << a << ',' << t << ']';
  return os.str();
}
}  // namespace

std::string x_in(const std::string& unit, const std::string& res, int t) {
  return tag3("x_in", unit, res, t);
}
std::string x_out(const std::string& unit, const std::string& res, int t) {
  return tag3("x_out", unit, res, t);
}
std::string status(const std::string& unit, int t) { return tag2("z", unit, t); }
std::string startup(const std::string& unit, int t) { return tag2("s", unit, t); }
std::string shutdown(const std::string& unit, int t) {
  return tag2("sdn", unit, t);
}
std::string level(const std::string& sto, int t) { return tag2("h", sto, t); }
std::string charge(const std::string& sto, int t) { return tag2("ch", sto, t); }
std::string discharge(const std::string& sto, int t) {
  return tag2("dis", sto, t);
}
std::string purchase(const std::string& mkt, int t) { return tag2("p", mkt, t); }
std::string sale(const std::string& mkt, int t) { return tag2("e", mkt, t); }
std::string edge_flow(int edge_index, const std::string& res, int t) {
  return tag3("f", "e" + std::to_string(edge_index), res, t);
}
std::string invest(const std::string& inv) { return "zinv[" + inv + "]"; }
std::string pwl_weight(const std::string& unit, int conv, int t, int b) {
  std::ostringstream os;
  os << "lam[" << unit << ",c" << conv << ',' << t << ",b" << b << ']';
  return os.str();
}
std::string pwl_segment(const std::string& unit, int conv, int t, int b) {
  std::ostringstream os;
  os << "seg[" << unit << ",c" << conv << ',' << t << ",b" << b << ']';
  return os.str();
}

}  // namespace var_name

namespace {

std::string row3(const char* tag, const std::string& a, const std::string& b,
                 int t) {
  std::ostringstream os;
  os << tag << '[' << a << ',' << b << ',' << t << ']';
  return os.str();
}
std::string row2(const char* tag, const std::string& a, int t) {
  std::ostringstream os;
  os << tag << '[' << a << ',' << t << ']';
  return os.str();
}

/// Distinct input/output resources of a unit, in declaration order.
std::vector<std::string> input_resources(const GeneratorUnit& u) {
  std::vector<std::string> out;
  for (const auto& c : u.conversions)
    if (std::find(out.begin(), out.end(), c.input) == out.end())
      out.push_back(c.input);
  return out;
}
std::vector<std::string> output_resources(const GeneratorUnit& u) {
  std::vector<std::string> out;
  for (const auto& c : u.conversions)
    if (std::find(out.begin(), out.end(), c.output) == out.end())
      out.push_back(c.output);
  return out;
}

}  // namespace

ModelBuilder::ModelBuilder(const MultiEnergySystem& sys, const Scenario& scn)
    : sys_(sys), scn_(scn) {}

int ModelBuilder::var(const std::string& name) const {
  const int idx = model_.find_variable(name);
  if (idx < 0) throw Error("internal: unknown variable '" + name + "'");
  return idx;
}

double ModelBuilder::annualized_investment_cost(
    const InvestmentOption& inv) const {
  const double hf = scn_.horizon_fraction;
  return inv.capex * hf / static_cast<double>(inv.depreciation_years) +
         inv.annual_fixed_cost * hf;
}

void ModelBuilder::build_variables() {
  if (auto diags = validate_system(sys_, scn_); !diags.empty())
    throw Error("system failed validation:\n" + format_diagnostics(diags));

  const int T = sys_.time_grid.step_count;

  for (const auto& u : sys_.units) {
    const auto ins = input_resources(u);
    const auto outs = output_resources(u);
    for (int t = 0; t < T; ++t) {
      for (const auto& r : ins) {
        // shared input flow must stay inside every consuming curve's domain
        double hi = kInf;
        for (const auto& c : u.conversions)
          if (c.input == r) hi = std::min(hi, c.curve_at(t).input_max());
        model_.add_variable(var_name::x_in(u.id, r, t), VarKind::Continuous,
                            0.0, hi);
      }
      for (const auto& r : outs) {
        double hi = kInf;
        for (const auto& c : u.conversions)
          if (c.output == r) hi = std::min(hi, c.curve_at(t).output_max());
        auto it = u.output_bounds.find(r);
        if (it != u.output_bounds.end()) hi = std::min(hi, it->second.hi);
        model_.add_variable(var_name::x_out(u.id, r, t), VarKind::Continuous,
                            0.0, hi);
      }
      model_.add_variable(var_name::status(u.id, t), VarKind::Binary, 0.0, 1.0);
      model_.add_variable(var_name::startup(u.id, t), VarKind::Binary, 0.0, 1.0);
      if (u.min_downtime_steps > 0) {
        // unit starts the horizon off (z_{-1} = 0): no shutdown at t = 0
        model_.add_variable(var_name::shutdown(u.id, t), VarKind::Binary, 0.0,
                            t == 0 ? 0.0 : 1.0);
      }
    }
  }

  for (const auto& k : sys_.storages) {
    const bool dead = k.level_bounds.hi == 0.0;
    for (int t = 0; t < T; ++t) {
      model_.add_variable(var_name::level(k.id, t), VarKind::Continuous,
                          k.level_bounds.lo, k.level_bounds.hi);
      model_.add_variable(var_name::charge(k.id, t), VarKind::Continuous, 0.0,
                          dead ? 0.0 : k.charge_max);
      model_.add_variable(var_name::discharge(k.id, t), VarKind::Continuous,
                          0.0, dead ? 0.0 : k.discharge_max);
    }
  }

  for (const auto& m : sys_.markets) {
    for (int t = 0; t < T; ++t) {
      model_.add_variable(var_name::purchase(m.id, t), VarKind::Continuous,
                          m.purchase_bounds.lo, m.purchase_bounds.hi);
      model_.add_variable(var_name::sale(m.id, t), VarKind::Continuous,
                          m.sale_bounds.lo, m.sale_bounds.hi);
    }
  }

  for (size_t e = 0; e < sys_.topology.edges.size(); ++e) {
    const Edge& ed = sys_.topology.edges[e];
    const double lo = ed.directed ? 0.0 : -ed.capacity;
    for (int t = 0; t < T; ++t)
      model_.add_variable(
          var_name::edge_flow(static_cast<int>(e), ed.resource, t),
          VarKind::Continuous, lo, ed.capacity);
  }

  for (const auto& inv : sys_.investments)
    model_.add_variable(var_name::invest(inv.id), VarKind::Binary, 0.0, 1.0);
}

void ModelBuilder::build_balance() {
  const int T = sys_.time_grid.step_count;

  struct Incident {
    std::vector<std::pair<const GeneratorUnit*, int>> unit_out;  // +x_out
    std::vector<std::pair<const GeneratorUnit*, int>> unit_in;   // -x_in
    std::vector<const StorageUnit*> storages;                    // +dis -ch
    std::vector<const Market*> markets;                          // +p -e
    std::vector<int> edges_in;                                   // +f
    std::vector<int> edges_out;                                  // -f
  };
  // (node, resource) -> incident entities, resolved once
  std::map<std::pair<std::string, std::string>, Incident> inc;

  for (const auto& u : sys_.units) {
    for (const auto& r : output_resources(u))
      inc[{u.node, r}].unit_out.push_back({&u, 0});
    for (const auto& r : input_resources(u))
      inc[{u.node, r}].unit_in.push_back({&u, 0});
  }
  for (const auto& k : sys_.storages) inc[{k.node, k.resource}].storages.push_back(&k);
  for (const auto& m : sys_.markets) inc[{m.node, m.resource}].markets.push_back(&m);
  for (size_t e = 0; e < sys_.topology.edges.size(); ++e) {
    const Edge& ed = sys_.topology.edges[e];
    inc[{ed.to, ed.resource}].edges_in.push_back(static_cast<int>(e));
    inc[{ed.from, ed.resource}].edges_out.push_back(static_cast<int>(e));
  }
  for (const auto& [key, series] : scn_.demand) {
    (void)series;
    inc[key];  // ensure a slot exists even with no incident devices
  }

  for (const auto& n : sys_.topology.nodes) {
    bool node_has_any = false;
    for (const auto& res : sys_.resources)
      if (inc.count({n.id, res.id})) node_has_any = true;
    if (!node_has_any) {
      model_.add_build_note({n.id, "degenerate-balance",
                             "no devices and no demand; 0 = 0 row skipped"});
      continue;
    }
    for (const auto& res : sys_.resources) {
      auto it = inc.find({n.id, res.id});
      if (it == inc.end()) continue;
      const Incident& in = it->second;

      bool any_demand = false;
      bool supply_side = !in.unit_out.empty() || !in.storages.empty() ||
                         !in.markets.empty() || !in.edges_in.empty();
      for (const int e : in.edges_out)
        if (!sys_.topology.edges[static_cast<size_t>(e)].directed)
          supply_side = true;  // undirected edge can import
      for (int t = 0; t < T && !any_demand; ++t)
        if (scn_.demand_at(n.id, res.id, t) > 0) any_demand = true;

      const bool empty_row = in.unit_out.empty() && in.unit_in.empty() &&
                             in.storages.empty() && in.markets.empty() &&
                             in.edges_in.empty() && in.edges_out.empty();
      if (empty_row) {
        if (any_demand) {
          model_.add_build_note({n.id, "demand-unreachable",
                                 "demand for '" + res.id +
                                     "' with no incident supply path"});
          model_.mark_structurally_infeasible();
        } else {
          model_.add_build_note({n.id, "degenerate-balance",
                                 "no devices and no demand for '" + res.id +
                                     "'; 0 = 0 row skipped"});
        }
        continue;
      }
      if (any_demand && !supply_side)
        model_.add_build_note({n.id, "demand-unreachable",
                               "demand for '" + res.id +
                                   "' with no incident supply path"});

      for (int t = 0; t < T; ++t) {
        LinConstraint row;
        row.name = row3("bal", n.id, res.id, t);
        row.sense = Sense::EQ;
        row.rhs = scn_.demand_at(n.id, res.id, t);
        for (const auto& [u, dummy] : in.unit_out) {
          (void)dummy;
          row.terms.push_back({var(var_name::x_out(u->id, res.id, t)), 1.0});
        }
        for (const auto& [u, dummy] : in.unit_in) {
          (void)dummy;
          row.terms.push_back({var(var_name::x_in(u->id, res.id, t)), -1.0});
        }
        for (const StorageUnit* k : in.storages) {
          row.terms.push_back({var(var_name::discharge(k->id, t)), 1.0});
          row.terms.push_back({var(var_name::charge(k->id, t)), -1.0});
        }
        for (const Market* m : in.markets) {
          row.terms.push_back({var(var_name::purchase(m->id, t)), 1.0});
          row.terms.push_back({var(var_name::sale(m->id, t)), -1.0});
        }
        for (const int e : in.edges_in)
          row.terms.push_back({var(var_name::edge_flow(e, res.id, t)), 1.0});
        for (const int e : in.edges_out)
          row.terms.push_back({var(var_name::edge_flow(e, res.id, t)), -1.0});
        model_.add_constraint(std::move(row));
      }
    }
  }
}

void ModelBuilder::build_conversion() {
  const int T = sys_.time_grid.step_count;
  for (const auto& u : sys_.units) {
    for (size_t ci = 0; ci < u.conversions.size(); ++ci) {
      const Conversion& cv = u.conversions[ci];
      const int c = static_cast<int>(ci);
      for (int t = 0; t < T; ++t) {
        const PwlCurve& curve = cv.curve_at(t);
        const int xin = var(var_name::x_in(u.id, cv.input, t));
        const int xout = var(var_name::x_out(u.id, cv.output, t));
        const int z = var(var_name::status(u.id, t));
        const auto& bp = curve.breakpoints;

        if (curve.is_linear()) {
          const double a = (bp[1].second - bp[0].second) /
                           (bp[1].first - bp[0].first);
          const double b = bp[0].second - a * bp[0].first;
          LinConstraint row;
          row.name = "conv[" + u.id + ",c" + std::to_string(c) + "," +
                     std::to_string(t) + "]";
          row.sense = Sense::EQ;
          row.rhs = 0.0;
          row.terms.push_back({xout, 1.0});
          if (a != 0.0) row.terms.push_back({xin, -a});
          if (b != 0.0) row.terms.push_back({z, -b});
          model_.add_constraint(std::move(row));
          if (a == 0.0) {
            // flat curve leaves x_in loose; tie it to commitment directly
            LinConstraint cap;
            cap.name = "convin[" + u.id + ",c" + std::to_string(c) + "," +
                       std::to_string(t) + "]";
            cap.sense = Sense::LE;
            cap.rhs = 0.0;
            cap.terms.push_back({xin, 1.0});
            cap.terms.push_back({z, -curve.input_max()});
            model_.add_constraint(std::move(cap));
          }
          continue;
        }

        // convex-combination encoding with adjacency binaries (SOS2 by
        // binaries); handles non-convex curves
        const int B = static_cast<int>(bp.size());
        std::vector<int> lam(static_cast<size_t>(B));
        std::vector<int> seg(static_cast<size_t>(B - 1));
        for (int b = 0; b < B; ++b)
          lam[static_cast<size_t>(b)] = model_.add_variable(
              var_name::pwl_weight(u.id, c, t, b), VarKind::Continuous, 0.0, 1.0);
        for (int b = 0; b + 1 < B; ++b)
          seg[static_cast<size_t>(b)] = model_.add_variable(
              var_name::pwl_segment(u.id, c, t, b), VarKind::Binary, 0.0, 1.0);

        const std::string base = u.id + ",c" + std::to_string(c) + "," +
                                 std::to_string(t);
        LinConstraint cvx;  // sum lambda = z (off -> all weights zero)
        cvx.name = "cvx[" + base + "]";
        cvx.sense = Sense::EQ;
        cvx.rhs = 0.0;
        for (int b = 0; b < B; ++b) cvx.terms.push_back({lam[static_cast<size_t>(b)], 1.0});
        cvx.terms.push_back({z, -1.0});
        model_.add_constraint(std::move(cvx));

        LinConstraint segsum;
        segsum.name = "segsum[" + base + "]";
        segsum.sense = Sense::EQ;
        segsum.rhs = 0.0;
        for (int b = 0; b + 1 < B; ++b)
          segsum.terms.push_back({seg[static_cast<size_t>(b)], 1.0});
        segsum.terms.push_back({z, -1.0});
        model_.add_constraint(std::move(segsum));

        for (int b = 0; b < B; ++b) {
          LinConstraint adj;
          adj.name = "adj[" + base + ",b" + std::to_string(b) + "]";
          adj.sense = Sense::LE;
          adj.rhs = 0.0;
          adj.terms.push_back({lam[static_cast<size_t>(b)], 1.0});
          if (b > 0) adj.terms.push_back({seg[static_cast<size_t>(b - 1)], -1.0});
          if (b + 1 < B) adj.terms.push_back({seg[static_cast<size_t>(b)], -1.0});
          model_.add_constraint(std::move(adj));
        }

        LinConstraint lin_in;
        lin_in.name = "convin[" + base + "]";
        lin_in.sense = Sense::EQ;
        lin_in.rhs = 0.0;
        lin_in.terms.push_back({xin, 1.0});
        for (int b = 0; b < B; ++b)
          if (bp[static_cast<size_t>(b)].first != 0.0)
            lin_in.terms.push_back(
                {lam[static_cast<size_t>(b)], -bp[static_cast<size_t>(b)].first});
        model_.add_constraint(std::move(lin_in));

        LinConstraint lin_out;
        lin_out.name = "conv[" + base + "]";
        lin_out.sense = Sense::EQ;
        lin_out.rhs = 0.0;
        lin_out.terms.push_back({xout, 1.0});
        for (int b = 0; b < B; ++b)
          if (bp[static_cast<size_t>(b)].second != 0.0)
            lin_out.terms.push_back(
                {lam[static_cast<size_t>(b)], -bp[static_cast<size_t>(b)].second});
        model_.add_constraint(std::move(lin_out));
      }
    }
  }
}

void ModelBuilder::build_commitment_logic() {
  const int T = sys_.time_grid.step_count;
  for (const auto& u : sys_.units) {
    for (int t = 0; t < T; ++t) {
      const int z = var(var_name::status(u.id, t));
      const int s = var(var_name::startup(u.id, t));
      const int zprev = t > 0 ? var(var_name::status(u.id, t - 1)) : -1;

      model_.add_implication({s, z, zprev});
      {  // s >= z_t - z_{t-1}
        LinConstraint row;
        row.name = row2("act_on", u.id, t);
        row.sense = Sense::LE;
        row.rhs = 0.0;
        row.terms.push_back({z, 1.0});
        if (zprev >= 0) row.terms.push_back({zprev, -1.0});
        row.terms.push_back({s, -1.0});
        model_.add_constraint(std::move(row));
      }
      {  // s <= z_t
        LinConstraint row;
        row.name = row2("act_ub1", u.id, t);
        row.sense = Sense::LE;
        row.rhs = 0.0;
        row.terms.push_back({s, 1.0});
        row.terms.push_back({z, -1.0});
        model_.add_constraint(std::move(row));
      }
      if (zprev >= 0) {  // s <= 1 - z_{t-1}; vacuous at t = 0
        LinConstraint row;
        row.name = row2("act_ub2", u.id, t);
        row.sense = Sense::LE;
        row.rhs = 1.0;
        row.terms.push_back({s, 1.0});
        row.terms.push_back({zprev, 1.0});
        model_.add_constraint(std::move(row));
      }

      if (u.min_downtime_steps > 0 && t > 0) {
        const int sdn = var(var_name::shutdown(u.id, t));
        model_.add_implication({sdn, zprev, z});
        {  // sdn >= z_{t-1} - z_t
          LinConstraint row;
          row.name = row2("act_off", u.id, t);
          row.sense = Sense::LE;
          row.rhs = 0.0;
          row.terms.push_back({zprev, 1.0});
          row.terms.push_back({z, -1.0});
          row.terms.push_back({sdn, -1.0});
          model_.add_constraint(std::move(row));
        }
        {  // sdn <= z_{t-1}
          LinConstraint row;
          row.name = row2("act_offub1", u.id, t);
          row.sense = Sense::LE;
          row.rhs = 0.0;
          row.terms.push_back({sdn, 1.0});
          row.terms.push_back({zprev, -1.0});
          model_.add_constraint(std::move(row));
        }
        {  // sdn <= 1 - z_t
          LinConstraint row;
          row.name = row2("act_offub2", u.id, t);
          row.sense = Sense::LE;
          row.rhs = 1.0;
          row.terms.push_back({sdn, 1.0});
          row.terms.push_back({z, 1.0});
          model_.add_constraint(std::move(row));
        }
      }

      // output stays inside [c_min, c_max] while committed and collapses
      // to zero when off (c_min binds only on committed units)
      for (const auto& r : output_resources(u)) {
        double curve_lo = kInf, curve_hi = -kInf;
        for (const auto& cvn : u.conversions) {
          if (cvn.output != r) continue;
          const PwlCurve& curve = cvn.curve_at(t);
          if (curve.is_linear()) {
            curve_lo = std::min(curve_lo,
                                std::min(curve.breakpoints.front().second,
                                         curve.breakpoints.back().second));
            curve_hi = std::max(curve_hi,
                                std::max(curve.breakpoints.front().second,
                                         curve.breakpoints.back().second));
          } else {
            // lambda encoding pins the range already
            curve_lo = std::min(curve_lo, 0.0);
            curve_hi = std::max(curve_hi, curve.output_max());
          }
        }
        double lo = 0.0, hi = curve_hi;
        if (auto it = u.output_bounds.find(r); it != u.output_bounds.end()) {
          lo = it->second.lo;
          hi = std::min(hi, it->second.hi);
        }
        if (curve_lo > 0.0) lo = std::max(lo, curve_lo);
        const int xout = var(var_name::x_out(u.id, r, t));
        {
          LinConstraint row;
          row.name = row3("cap_hi", u.id, r, t);
          row.sense = Sense::LE;
          row.rhs = 0.0;
          row.terms.push_back({xout, 1.0});
          row.terms.push_back({z, -hi});
          model_.add_constraint(std::move(row));
        }
        if (lo > 0.0) {
          LinConstraint row;
          row.name = row3("cap_lo", u.id, r, t);
          row.sense = Sense::LE;
          row.rhs = 0.0;
          row.terms.push_back({z, lo});
          row.terms.push_back({xout, -1.0});
          model_.add_constraint(std::move(row));
        }
      }
    }
  }
}

void ModelBuilder::build_min_updown() {
  const int T = sys_.time_grid.step_count;
  for (const auto& u : sys_.units) {
    // windows of length <= 1 reduce to rows already emitted by the
    // activation logic
    if (u.min_uptime_steps >= 2) {
      for (int t = 0; t < T; ++t) {
        const auto w = min_updown_windows(u, t);
        LinConstraint row;
        row.name = row2("minup", u.id, t);
        row.sense = Sense::LE;
        row.rhs = 0.0;
        for (int tau : w.up)
          row.terms.push_back({var(var_name::startup(u.id, tau)), 1.0});
        row.terms.push_back({var(var_name::status(u.id, t)), -1.0});
        model_.add_constraint(std::move(row));
      }
    }
    if (u.min_downtime_steps >= 2) {
      for (int t = 0; t < T; ++t) {
        const auto w = min_updown_windows(u, t);
        LinConstraint row;
        row.name = row2("mindn", u.id, t);
        row.sense = Sense::LE;
        row.rhs = 1.0;
        for (int tau : w.down)
          row.terms.push_back({var(var_name::shutdown(u.id, tau)), 1.0});
        row.terms.push_back({var(var_name::status(u.id, t)), 1.0});
        model_.add_constraint(std::move(row));
      }
    }
  }
}

void ModelBuilder::build_ramping() {
  const int T = sys_.time_grid.step_count;
  for (const auto& u : sys_.units) {
    const bool up = std::isfinite(u.ramp_up);
    const bool down = std::isfinite(u.ramp_down);
    if (!up && !down) continue;
    for (const auto& r : output_resources(u)) {
      for (int t = 0; t + 1 < T; ++t) {
        const int x0 = var(var_name::x_out(u.id, r, t));
        const int x1 = var(var_name::x_out(u.id, r, t + 1));
        if (up) {
          LinConstraint row;
          row.name = row3("ramp_up", u.id, r, t);
          row.sense = Sense::LE;
          row.rhs = u.ramp_up;
          row.terms.push_back({x1, 1.0});
          row.terms.push_back({x0, -1.0});
          model_.add_constraint(std::move(row));
        }
        if (down) {
          LinConstraint row;
          row.name = row3("ramp_dn", u.id, r, t);
          row.sense = Sense::LE;
          row.rhs = u.ramp_down;
          row.terms.push_back({x0, 1.0});
          row.terms.push_back({x1, -1.0});
          model_.add_constraint(std::move(row));
        }
      }
    }
  }
}

void ModelBuilder::build_storage() {
  const int T = sys_.time_grid.step_count;

  // storages unlocked by an investment start at initial_level only when
  // built; resolve the owning investment up front
  std::map<std::string, const InvestmentOption*> owner;
  for (const auto& inv : sys_.investments)
    for (const auto& ent : inv.enabled_entities)
      if (sys_.find_storage(ent)) owner[ent] = &inv;

  for (const auto& k : sys_.storages) {
    for (int t = 0; t < T; ++t) {
      LinConstraint row;
      row.name = row2("sto", k.id, t);
      row.sense = Sense::EQ;
      row.terms.push_back({var(var_name::level(k.id, t)), 1.0});
      row.terms.push_back({var(var_name::charge(k.id, t)), -k.load_eff});
      row.terms.push_back({var(var_name::discharge(k.id, t)), k.unload_eff});
      if (t == 0) {
        auto it = owner.find(k.id);
        if (it != owner.end() && k.initial_level != 0.0) {
          row.terms.push_back(
              {var(var_name::invest(it->second->id)), -k.initial_level});
          row.rhs = 0.0;
        } else {
          row.rhs = k.initial_level;
        }
      } else {
        row.terms.push_back(
            {var(var_name::level(k.id, t - 1)), -k.loss_factor});
        row.rhs = 0.0;
      }
      model_.add_constraint(std::move(row));
    }
    if (k.cyclic && T >= 2) {
      LinConstraint row;
      row.name = "sto_cyc[" + k.id + "]";
      row.sense = Sense::EQ;
      row.rhs = 0.0;
      row.terms.push_back({var(var_name::level(k.id, T - 1)), 1.0});
      row.terms.push_back({var(var_name::level(k.id, 0)), -1.0});
      model_.add_constraint(std::move(row));
    }
  }
}

void ModelBuilder::build_investment_linking() {
  const int T = sys_.time_grid.step_count;
  for (const auto& inv : sys_.investments) {
    const int zi = var(var_name::invest(inv.id));
    for (const auto& ent : inv.enabled_entities) {
      if (const GeneratorUnit* u = sys_.find_unit(ent)) {
        for (int t = 0; t < T; ++t) {
          LinConstraint row;
          row.name = row3("invz", u->id, inv.id, t);
          row.sense = Sense::LE;
          row.rhs = 0.0;
          row.terms.push_back({var(var_name::status(u->id, t)), 1.0});
          row.terms.push_back({zi, -1.0});
          model_.add_constraint(std::move(row));
        }
      } else if (const StorageUnit* k = sys_.find_storage(ent)) {
        for (int t = 0; t < T; ++t) {
          auto gate = [&](const char* tag, const std::string& vname,
                          double cap) {
            LinConstraint row;
            row.name = row3(tag, k->id, inv.id, t);
            row.sense = Sense::LE;
            row.rhs = 0.0;
            row.terms.push_back({var(vname), 1.0});
            row.terms.push_back({zi, -cap});
            model_.add_constraint(std::move(row));
          };
          gate("invh", var_name::level(k->id, t), k->level_bounds.hi);
          gate("invch", var_name::charge(k->id, t), k->charge_max);
          gate("invdis", var_name::discharge(k->id, t), k->discharge_max);
        }
      }
    }
  }
}

void ModelBuilder::build_objectives() {
  const int T = sys_.time_grid.step_count;
  LinExpr cost;
  LinExpr emis;
  auto add = [](LinExpr& e, int v, double c) {
    if (c != 0.0) e.terms.push_back({v, c});
  };

  for (const auto& inv : sys_.investments)
    add(cost, var(var_name::invest(inv.id)), annualized_investment_cost(inv));

  for (const auto& u : sys_.units) {
    for (int t = 0; t < T; ++t) {
      add(cost, var(var_name::status(u.id, t)), u.fixed_running_cost);
      add(cost, var(var_name::startup(u.id, t)), u.startup_cost);
      for (const auto& r : input_resources(u)) {
        const int xin = var(var_name::x_in(u.id, r, t));
        if (auto it = u.variable_cost.find(r); it != u.variable_cost.end())
          add(cost, xin, it->second);
        if (auto it = u.emission_factor.find(r); it != u.emission_factor.end())
          add(emis, xin, it->second);
      }
    }
  }

  for (const auto& m : sys_.markets) {
    for (int t = 0; t < T; ++t) {
      add(cost, var(var_name::purchase(m.id, t)),
          m.purchase_price[static_cast<size_t>(t)]);
      add(cost, var(var_name::sale(m.id, t)),
          -m.sale_price[static_cast<size_t>(t)]);
      add(emis, var(var_name::purchase(m.id, t)), m.purchase_emission_factor);
    }
  }

  model_.set_objective_cost(std::move(cost));
  model_.set_objective_emissions(std::move(emis));
}

MilpModel assemble(const MultiEnergySystem& sys, const Scenario& scn) {
  ModelBuilder b(sys, scn);
  b.build_variables();
  b.build_balance();
  b.build_conversion();
  b.build_commitment_logic();
  b.build_min_updown();
  b.build_ramping();
  b.build_storage();
  b.build_investment_linking();
  b.build_objectives();
  MilpModel m = b.take();
  if (auto diags = m.self_check(); !diags.empty())
    throw Error("assembled model failed self-check:\n" +
                format_diagnostics(diags));
  return m;
}

}  // namespace dhplan
