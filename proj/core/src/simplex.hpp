// Internal LP engine: bounded-variable revised simplex over a sparse
// column store, basis kept as a sparse LU (left-looking, partial
// pivoting) plus product-form eta updates. Not installed; the public
// surface is dhplan/solver.hpp.
#ifndef DHPLAN_SRC_SIMPLEX_HPP
#define DHPLAN_SRC_SIMPLEX_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace dhplan::detail {

/// Rows are equalities a.x + slack = rhs; the slack bounds encode the
/// row sense (<=: [0,inf), =: [0,0], >=: (-inf,0]). Unbounded ends are
/// IEEE infinities.
struct LpProblem {
  int nrows = 0;
  int nstruct = 0;
  // structural columns, CSC
  std::vector<int> colptr;   // size nstruct+1
  std::vector<int> rowind;
  std::vector<double> value;
  std::vector<double> cost;      // size nstruct, minimization
  std::vector<double> lower;     // size nstruct (defaults; solve may override)
  std::vector<double> upper;
  std::vector<double> slack_lower;  // size nrows
  std::vector<double> slack_upper;
  std::vector<double> rhs;

  int ncols() const { return nstruct + nrows; }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;  // structural values (empty unless Optimal)
  double objective = 0.0;
  long iterations = 0;
};

struct LpOptions {
  double pivot_tol = 1e-9;        // smallest acceptable pivot magnitude
  double feas_tol = 1e-9;         // bound feasibility
  double opt_tol = 1e-9;          // reduced-cost optimality
  long iteration_limit = -1;      // <0: auto from problem size
  int refactor_interval = 100;    // etas between refactorizations
  double time_limit = 0.0;        // seconds; <=0: none
};

class SimplexSolver {
 public:
  explicit SimplexSolver(const LpProblem& p);

  /// Solves with the given structural bounds (branch-and-bound nodes
  /// override the defaults). Always starts from the all-slack basis.
  LpResult solve(std::span<const double> lo, std::span<const double> hi,
                 const LpOptions& opt);

 private:
  enum Status : unsigned char { kBasic, kAtLower, kAtUpper, kFreeZero };

  struct Eta {
    int pos = -1;  // basis position replaced
    std::vector<std::pair<int, double>> entries;  // (basis position, value)
    double pivot = 0.0;  // entry at `pos`
  };

  // column access helpers (structural or slack)
  template <typename F>
  void for_col(int j, F&& f) const {
    if (j < p_.nstruct) {
      for (int k = p_.colptr[static_cast<size_t>(j)];
           k < p_.colptr[static_cast<size_t>(j) + 1]; ++k)
        f(p_.rowind[static_cast<size_t>(k)], p_.value[static_cast<size_t>(k)]);
    } else {
      f(j - p_.nstruct, 1.0);
    }
  }

  double lo(int j) const { return j < p_.nstruct ? lo_store_[static_cast<size_t>(j)] : p_.slack_lower[static_cast<size_t>(j - p_.nstruct)]; }
  double hi(int j) const { return j < p_.nstruct ? hi_store_[static_cast<size_t>(j)] : p_.slack_upper[static_cast<size_t>(j - p_.nstruct)]; }
  double static_cost(int j) const { return j < p_.nstruct ? p_.cost[static_cast<size_t>(j)] : 0.0; }

  void reset_basis();
  void factorize();           // LU of current basis; clears etas
  void ftran(std::vector<double>& v) const;  // v: by row -> by basis position
  void btran(std::vector<double>& v) const;  // v: by basis position -> by row
  void compute_basic_values();
  double infeasibility(double* max_viol = nullptr) const;
  double residual_norm() const;

  // one simplex phase; phase1=true uses dynamic infeasibility costs
  LpStatus iterate(bool phase1, const LpOptions& opt, long& iters,
                   long iter_limit);

  const LpProblem& p_;

  // active bounds for structurals (copied per solve)
  std::vector<double> lo_store_, hi_store_;

  std::vector<int> basis_;        // basis position -> column
  std::vector<Status> status_;    // column -> status
  std::vector<double> x_;         // column -> value
  std::vector<double> cb_;        // basis position -> cost (phase-dependent)

  // LU in permuted coordinates (position space)
  std::vector<int> lptr_, lind_;
  std::vector<double> lval_;
  std::vector<int> uptr_, uind_;
  std::vector<double> uval_;
  std::vector<double> udiag_;
  std::vector<int> perm_r_;  // position -> original row
  std::vector<int> pinv_;    // original row -> position
  std::vector<Eta> etas_;
};

}  // namespace dhplan::detail

#endif
