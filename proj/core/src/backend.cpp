#include "dhplan/backend.hpp"

namespace dhplan {

SolveResult BuiltinBackend::solve(const MilpModel& model,
                                  const SolveRequest& req,
                                  const SolveConfig& config) const {
  return branch_and_bound(model, req, config);
}

ExternalBackend::ExternalBackend(SolverAdapterConfig adapter)
    : adapter_(std::move(adapter)) {
  adapter_.check();
}

SolveResult ExternalBackend::solve(const MilpModel& model,
                                   const SolveRequest& req,
                                   const SolveConfig& config) const {
  return run_external(model, req, adapter_, config);
}

RecordingBackend::RecordingBackend(const SolverBackend& inner,
                                   std::function<void(const Call&)> on_call)
    : inner_(inner), on_call_(std::move(on_call)) {}

SolveResult RecordingBackend::solve(const MilpModel& model,
                                    const SolveRequest& req,
                                    const SolveConfig& config) const {
  if (on_call_) {
    Call c;
    c.objective = req.objective;
    c.rel_gap = config.rel_gap;
    c.has_cost_cap = !req.extra_rows.empty();
    c.cost_cap_rhs = c.has_cost_cap ? req.extra_rows.front().rhs : 0.0;
    on_call_(c);
  }
  return inner_.solve(model, req, config);
}

}  // namespace dhplan
