#include "dhplan/pareto.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <optional>

#include "dhplan/errors.hpp"

namespace dhplan {

double SweepConfig::gap_for_step(double step) const {
  for (const auto& [s, g] : gap_schedule)
    if (std::abs(s - step) <= 1e-12) return g;
  return default_gap;
}

void SweepConfig::check() const {
  if (relaxation_steps.empty()) throw Error("sweep needs at least one step");
  double prev = -1.0;
  for (const double s : relaxation_steps) {
    if (!(s >= 0) || !(s > prev))
      throw Error("relaxation steps must be >= 0 and strictly increasing");
    prev = s;
  }
  for (const auto& [s, g] : gap_schedule) {
    (void)s;
    if (!(g > 0)) throw Error("MIP gaps must be > 0");
  }
  if (!(default_gap > 0)) throw Error("MIP gaps must be > 0");
}

std::string to_string(InvestmentClass c) {
  switch (c) {
    case InvestmentClass::Robust: return "robust";
    case InvestmentClass::TargetDependent: return "target-dependent";
    case InvestmentClass::Rejected: return "rejected";
  }
  return "?";
}

namespace {

/// Investment variables of a model, in variable order, with their ids
/// recovered from the structured names (zinv[<id>]).
struct InvestmentVars {
  std::vector<int> index;
  std::vector<std::string> ids;
};

InvestmentVars investment_vars(const MilpModel& model) {
  InvestmentVars out;
  for (const auto& v : model.variables()) {
    if (v.name.rfind("zinv[", 0) == 0 && v.name.back() == ']') {
      out.index.push_back(v.index);
      out.ids.push_back(v.name.substr(5, v.name.size() - 6));
    }
  }
  return out;
}

/// f1 <= (1+step)*anchor as a row; nullopt when f1 has no terms (the
/// cap is vacuous on a zero-cost model).
std::optional<LinConstraint> cost_cap_row(const MilpModel& model,
                                          double anchor_cost, double step) {
  const LinExpr& f1 = model.objective_cost();
  if (f1.terms.empty()) return std::nullopt;
  LinConstraint cap;
  cap.name = "costcap";
  cap.sense = Sense::LE;
  cap.rhs = (1.0 + step) * anchor_cost - f1.constant;
  cap.terms = f1.terms;
  return cap;
}

}  // namespace

AnchorResult solve_cost_anchor(const MilpModel& model,
                               const SolverBackend& backend,
                               const SweepConfig& sweep) {
  sweep.check();
  SolveConfig cfg = sweep.solve;
  cfg.rel_gap = sweep.gap_for_step(sweep.relaxation_steps.front());
  SolveRequest req;
  req.objective = Objective::Cost;
  AnchorResult out;
  out.result = backend.solve(model, req, cfg);
  out.anchor_cost = out.result.objective_value;
  return out;
}

ParetoPoint solve_emissions_capped(const MilpModel& model,
                                   const SolverBackend& backend,
                                   const SweepConfig& sweep,
                                   double anchor_cost, double step,
                                   double gap) {
  ParetoPoint pt;
  pt.step = step;

  SolveConfig cfg = sweep.solve;
  cfg.rel_gap = gap;
  SolveRequest req;
  req.objective = Objective::Emissions;
  if (auto cap = cost_cap_row(model, anchor_cost, step)) {
    req.extra_rows.push_back(std::move(*cap));
  }

  SolveResult res;
  try {
    res = backend.solve(model, req, cfg);
  } catch (const std::exception& e) {
    pt.failure = e.what();
    pt.status = SolveStatus::Infeasible;
    return pt;
  }

  pt.status = res.status;
  pt.rel_gap = res.rel_gap;
  pt.node_count = res.node_count;
  pt.wall_time = res.wall_time;

  if (res.status != SolveStatus::Optimal && res.status != SolveStatus::GapReached) {
    // step >= 0 with a feasible anchor cannot be infeasible; surface it
    pt.failure = "capped solve ended " + to_string(res.status) +
                 " (internal inconsistency for step >= 0)";
    return pt;
  }

  pt.emissions = res.objective_value;
  pt.cost = model.objective_cost().evaluate(res.assignment);

  const double cap = (1.0 + step) * anchor_cost;
  const double slack = 1e-9 * std::max(1.0, std::abs(cap));
  // a gapped MIP solve may sit on the cap row within the LP residual
  const double audit_tol = slack + 2e-6 * std::max(1.0, std::abs(cap));
  if (pt.cost > cap + audit_tol)
    pt.failure = "audited cost " + std::to_string(pt.cost) +
                 " exceeds cap " + std::to_string(cap);

  const InvestmentVars inv = investment_vars(model);
  const double tol = cfg.integer_tolerance;
  for (size_t i = 0; i < inv.index.size(); ++i) {
    const double v = res.assignment[static_cast<size_t>(inv.index[i])];
    pt.investment_vector.push_back(v > 0.5 ? 1 : 0);
    if (std::abs(v - 0.5) <= tol) pt.fragile_investments.push_back(inv.ids[i]);
  }
  return pt;
}

std::map<std::string, InvestmentClass> classify_investments(
    const std::vector<std::string>& investment_ids,
    const std::vector<ParetoPoint>& points) {
  std::vector<const ParetoPoint*> usable;
  for (const auto& p : points)
    if (p.failure.empty() && p.investment_vector.size() == investment_ids.size())
      usable.push_back(&p);
  std::map<std::string, InvestmentClass> out;
  if (usable.empty()) return out;
  for (size_t i = 0; i < investment_ids.size(); ++i) {
    int count = 0;
    for (const ParetoPoint* p : usable)
      count += p->investment_vector[i] ? 1 : 0;
    InvestmentClass c;
    if (count == static_cast<int>(usable.size()))
      c = InvestmentClass::Robust;
    else if (count == 0)
      c = InvestmentClass::Rejected;
    else
      c = InvestmentClass::TargetDependent;
    out[investment_ids[i]] = c;
  }
  return out;
}

SolutionCatalog run_sweep_model(const MilpModel& model,
                                const SweepConfig& sweep,
                                const SolverBackend& backend) {
  sweep.check();
  SolutionCatalog cat;
  cat.investment_ids = investment_vars(model).ids;

  const AnchorResult anchor = solve_cost_anchor(model, backend, sweep);
  cat.anchor_cost = anchor.anchor_cost;
  if (anchor.result.status != SolveStatus::Optimal &&
      anchor.result.status != SolveStatus::GapReached)
    throw Error("cost anchor solve ended " + to_string(anchor.result.status));

  const size_t nsteps = sweep.relaxation_steps.size();
  cat.points.resize(nsteps);

  auto run_step = [&](size_t i) {
    const double step = sweep.relaxation_steps[i];
    cat.points[i] = solve_emissions_capped(model, backend, sweep,
                                           cat.anchor_cost, step,
                                           sweep.gap_for_step(step));
  };

  if (sweep.jobs <= 1 || nsteps <= 1) {
    for (size_t i = 0; i < nsteps; ++i) run_step(i);
  } else {
    const size_t jobs = std::min<size_t>(static_cast<size_t>(sweep.jobs), nsteps);
    std::vector<std::future<void>> futs;
    std::atomic<size_t> next{0};
    for (size_t w = 0; w < jobs; ++w)
      futs.push_back(std::async(std::launch::async, [&] {
        for (;;) {
          const size_t i = next.fetch_add(1);
          if (i >= nsteps) return;
          run_step(i);
        }
      }));
    for (auto& f : futs) f.get();
  }

  // normalization bases: the cost anchor and the first point's emissions
  const ParetoPoint* first_ok = nullptr;
  for (const auto& p : cat.points)
    if (p.failure.empty()) {
      first_ok = &p;
      break;
    }
  cat.anchor_emissions = first_ok ? first_ok->emissions : 0.0;
  auto norm = [](double v, double base) {
    return std::abs(base) > 1e-12 ? v / base : 1.0;
  };
  for (auto& p : cat.points) {
    if (!p.failure.empty()) continue;
    p.normalized_cost = norm(p.cost, cat.anchor_cost);
    p.normalized_emissions = norm(p.emissions, cat.anchor_emissions);
  }

  cat.classification = classify_investments(cat.investment_ids, cat.points);
  return cat;
}

SolutionCatalog run_sweep(const MultiEnergySystem& sys, const Scenario& scn,
                          const SweepConfig& sweep,
                          const SolverBackend& backend) {
  const MilpModel model = assemble(sys, scn);
  return run_sweep_model(model, sweep, backend);
}

}  // namespace dhplan
