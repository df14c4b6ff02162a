#ifndef DHPLAN_BACKEND_HPP
#define DHPLAN_BACKEND_HPP

#include <functional>
#include <memory>

#include "dhplan/external.hpp"
#include "dhplan/solver.hpp"

namespace dhplan {

/// Solve entry point the Pareto driver talks to. Implementations must
/// be safe to call from several threads at once (each call owns its
/// solver state).
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual SolveResult solve(const MilpModel& model, const SolveRequest& req,
                            const SolveConfig& config) const = 0;
};

class BuiltinBackend final : public SolverBackend {
 public:
  SolveResult solve(const MilpModel& model, const SolveRequest& req,
                    const SolveConfig& config) const override;
};

class ExternalBackend final : public SolverBackend {
 public:
  explicit ExternalBackend(SolverAdapterConfig adapter);
  SolveResult solve(const MilpModel& model, const SolveRequest& req,
                    const SolveConfig& config) const override;

 private:
  SolverAdapterConfig adapter_;
};

/// Wraps a backend and reports every call; used for gap-schedule
/// instrumentation in tests and for verbose CLI progress.
class RecordingBackend final : public SolverBackend {
 public:
  struct Call {
    Objective objective;
    double rel_gap;
    bool has_cost_cap;
    double cost_cap_rhs;
  };

  RecordingBackend(const SolverBackend& inner,
                   std::function<void(const Call&)> on_call);
  SolveResult solve(const MilpModel& model, const SolveRequest& req,
                    const SolveConfig& config) const override;

 private:
  const SolverBackend& inner_;
  std::function<void(const Call&)> on_call_;
};

}  // namespace dhplan

#endif
