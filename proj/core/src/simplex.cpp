#include "simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "dhplan/errors.hpp"

namespace dhplan::detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}
}  // namespace

SimplexSolver::SimplexSolver(const LpProblem& p) : p_(p) {}

void SimplexSolver::reset_basis() {
  const int m = p_.nrows;
  const int N = p_.ncols();
  basis_.resize(static_cast<size_t>(m));
  status_.assign(static_cast<size_t>(N), kAtLower);
  x_.assign(static_cast<size_t>(N), 0.0);

  for (int j = 0; j < N; ++j) {
    const double l = lo(j), u = hi(j);
    if (std::isfinite(l) && std::isfinite(u)) {
      // finite bound nearest zero
      if (std::abs(l) <= std::abs(u)) {
        status_[static_cast<size_t>(j)] = kAtLower;
        x_[static_cast<size_t>(j)] = l;
      } else {
        status_[static_cast<size_t>(j)] = kAtUpper;
        x_[static_cast<size_t>(j)] = u;
      }
    } else if (std::isfinite(l)) {
      status_[static_cast<size_t>(j)] = kAtLower;
      x_[static_cast<size_t>(j)] = l;
    } else if (std::isfinite(u)) {
      status_[static_cast<size_t>(j)] = kAtUpper;
      x_[static_cast<size_t>(j)] = u;
    } else {
      status_[static_cast<size_t>(j)] = kFreeZero;
      x_[static_cast<size_t>(j)] = 0.0;
    }
  }
  for (int i = 0; i < m; ++i) {
    const int j = p_.nstruct + i;
    basis_[static_cast<size_t>(i)] = j;
    status_[static_cast<size_t>(j)] = kBasic;
  }
}

void SimplexSolver::factorize() {
  const int m = p_.nrows;
  lptr_.assign(1, 0);
  lind_.clear();
  lval_.clear();
  uptr_.assign(1, 0);
  uind_.clear();
  uval_.clear();
  udiag_.assign(static_cast<size_t>(m), 0.0);
  perm_r_.assign(static_cast<size_t>(m), -1);
  pinv_.assign(static_cast<size_t>(m), -1);
  etas_.clear();

  std::vector<double> w(static_cast<size_t>(m), 0.0);
  std::vector<int> pattern;           // original rows with entries in w
  std::vector<char> in_pattern(static_cast<size_t>(m), 0);
  std::vector<int> reach;             // pivoted positions to apply
  std::vector<char> visited(static_cast<size_t>(m), 0);
  std::vector<int> dfs_stack;

  pattern.reserve(64);
  reach.reserve(64);

  for (int jcol = 0; jcol < m; ++jcol) {
    // scatter basis column jcol
    pattern.clear();
    for_col(basis_[static_cast<size_t>(jcol)], [&](int r, double v) {
      w[static_cast<size_t>(r)] = v;
      in_pattern[static_cast<size_t>(r)] = 1;
      pattern.push_back(r);
    });

    // reach: every already-pivoted column whose application can touch w
    reach.clear();
    for (int r : pattern) {
      const int p0 = pinv_[static_cast<size_t>(r)];
      if (p0 < 0 || visited[static_cast<size_t>(p0)]) continue;
      dfs_stack.push_back(p0);
      visited[static_cast<size_t>(p0)] = 1;
      while (!dfs_stack.empty()) {
        const int p = dfs_stack.back();
        dfs_stack.pop_back();
        reach.push_back(p);
        for (int k = lptr_[static_cast<size_t>(p)];
             k < lptr_[static_cast<size_t>(p) + 1]; ++k) {
          const int r2 = lind_[static_cast<size_t>(k)];  // original row here
          const int p2 = pinv_[static_cast<size_t>(r2)];
          if (p2 >= 0 && !visited[static_cast<size_t>(p2)]) {
            visited[static_cast<size_t>(p2)] = 1;
            dfs_stack.push_back(p2);
          }
        }
      }
    }
    std::sort(reach.begin(), reach.end());

    // numeric left-looking elimination; ascending positions respect all
    // dependencies because permuted L is strictly lower triangular
    for (const int p : reach) {
      visited[static_cast<size_t>(p)] = 0;
      const int prow = perm_r_[static_cast<size_t>(p)];
      const double piv = w[static_cast<size_t>(prow)];
      if (piv == 0.0) continue;
      for (int k = lptr_[static_cast<size_t>(p)];
           k < lptr_[static_cast<size_t>(p) + 1]; ++k) {
        const int r2 = lind_[static_cast<size_t>(k)];
        if (!in_pattern[static_cast<size_t>(r2)]) {
          in_pattern[static_cast<size_t>(r2)] = 1;
          pattern.push_back(r2);
          w[static_cast<size_t>(r2)] = 0.0;
        }
        w[static_cast<size_t>(r2)] -= lval_[static_cast<size_t>(k)] * piv;
      }
    }

    // partial pivoting over unpivoted rows
    int prow = -1;
    double pmax = 0.0;
    for (const int r : pattern) {
      if (pinv_[static_cast<size_t>(r)] >= 0) continue;
      const double a = std::abs(w[static_cast<size_t>(r)]);
      if (a > pmax || (a == pmax && prow >= 0 && r < prow && a > 0.0)) {
        pmax = a;
        prow = r;
      }
    }
    if (prow < 0 || pmax < 1e-13)
      throw NumericalError("singular basis during refactorization (column " +
                           std::to_string(jcol) + ")");
    const double piv = w[static_cast<size_t>(prow)];

    // store U column (entries at pivoted positions) and L column
    for (const int p : reach) {
      const double v = w[static_cast<size_t>(perm_r_[static_cast<size_t>(p)])];
      if (v != 0.0) {
        uind_.push_back(p);
        uval_.push_back(v);
      }
    }
    uptr_.push_back(static_cast<int>(uind_.size()));
    udiag_[static_cast<size_t>(jcol)] = piv;

    for (const int r : pattern) {
      if (pinv_[static_cast<size_t>(r)] >= 0 || r == prow) continue;
      const double v = w[static_cast<size_t>(r)] / piv;
      if (v != 0.0) {
        lind_.push_back(r);  // original row; remapped to positions below
        lval_.push_back(v);
      }
    }
    lptr_.push_back(static_cast<int>(lind_.size()));

    perm_r_[static_cast<size_t>(jcol)] = prow;
    pinv_[static_cast<size_t>(prow)] = jcol;

    for (const int r : pattern) {
      w[static_cast<size_t>(r)] = 0.0;
      in_pattern[static_cast<size_t>(r)] = 0;
    }
  }

  // remap L row indices from original rows to basis positions
  for (auto& r : lind_) r = pinv_[static_cast<size_t>(r)];
}

void SimplexSolver::ftran(std::vector<double>& v) const {
  const int m = p_.nrows;
  std::vector<double> vp(static_cast<size_t>(m));
  for (int p = 0; p < m; ++p)
    vp[static_cast<size_t>(p)] = v[static_cast<size_t>(perm_r_[static_cast<size_t>(p)])];

  for (int p = 0; p < m; ++p) {
    const double val = vp[static_cast<size_t>(p)];
    if (val == 0.0) continue;
    for (int k = lptr_[static_cast<size_t>(p)];
         k < lptr_[static_cast<size_t>(p) + 1]; ++k)
      vp[static_cast<size_t>(lind_[static_cast<size_t>(k)])] -=
          lval_[static_cast<size_t>(k)] * val;
  }
  for (int j = m - 1; j >= 0; --j) {
    const double t = vp[static_cast<size_t>(j)] / udiag_[static_cast<size_t>(j)];
    vp[static_cast<size_t>(j)] = t;
    if (t == 0.0) continue;
    for (int k = uptr_[static_cast<size_t>(j)];
         k < uptr_[static_cast<size_t>(j) + 1]; ++k)
      vp[static_cast<size_t>(uind_[static_cast<size_t>(k)])] -=
          uval_[static_cast<size_t>(k)] * t;
  }
  for (const Eta& e : etas_) {
    const double tr = vp[static_cast<size_t>(e.pos)] / e.pivot;
    vp[static_cast<size_t>(e.pos)] = tr;
    if (tr == 0.0) continue;
    for (const auto& [pos, val] : e.entries)
      vp[static_cast<size_t>(pos)] -= val * tr;
  }
  v = std::move(vp);
}

void SimplexSolver::btran(std::vector<double>& v) const {
  const int m = p_.nrows;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double acc = 0.0;
    for (const auto& [pos, val] : it->entries)
      acc += val * v[static_cast<size_t>(pos)];
    v[static_cast<size_t>(it->pos)] =
        (v[static_cast<size_t>(it->pos)] - acc) / it->pivot;
  }
  std::vector<double> w(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    double acc = v[static_cast<size_t>(j)];
    for (int k = uptr_[static_cast<size_t>(j)];
         k < uptr_[static_cast<size_t>(j) + 1]; ++k)
      acc -= uval_[static_cast<size_t>(k)] *
             w[static_cast<size_t>(uind_[static_cast<size_t>(k)])];
    w[static_cast<size_t>(j)] = acc / udiag_[static_cast<size_t>(j)];
  }
  for (int p = m - 1; p >= 0; --p) {
    double acc = w[static_cast<size_t>(p)];
    for (int k = lptr_[static_cast<size_t>(p)];
         k < lptr_[static_cast<size_t>(p) + 1]; ++k)
      acc -= lval_[static_cast<size_t>(k)] *
             w[static_cast<size_t>(lind_[static_cast<size_t>(k)])];
    w[static_cast<size_t>(p)] = acc;
  }
  std::vector<double> y(static_cast<size_t>(m));
  for (int p = 0; p < m; ++p)
    y[static_cast<size_t>(perm_r_[static_cast<size_t>(p)])] = w[static_cast<size_t>(p)];
  v = std::move(y);
}

void SimplexSolver::compute_basic_values() {
  const int m = p_.nrows;
  const int N = p_.ncols();
  std::vector<double> rhs = p_.rhs;
  for (int j = 0; j < N; ++j) {
    if (status_[static_cast<size_t>(j)] == kBasic) continue;
    const double xj = x_[static_cast<size_t>(j)];
    if (xj == 0.0) continue;
    for_col(j, [&](int r, double v) { rhs[static_cast<size_t>(r)] -= v * xj; });
  }
  ftran(rhs);
  for (int i = 0; i < m; ++i)
    x_[static_cast<size_t>(basis_[static_cast<size_t>(i)])] =
        rhs[static_cast<size_t>(i)];
}

double SimplexSolver::infeasibility(double* max_viol) const {
  double sum = 0.0, mx = 0.0;
  for (int i = 0; i < p_.nrows; ++i) {
    const int j = basis_[static_cast<size_t>(i)];
    const double xj = x_[static_cast<size_t>(j)];
    double v = 0.0;
    if (xj < lo(j)) v = lo(j) - xj;
    else if (xj > hi(j)) v = xj - hi(j);
    sum += v;
    mx = std::max(mx, v);
  }
  if (max_viol) *max_viol = mx;
  return sum;
}

double SimplexSolver::residual_norm() const {
  const int m = p_.nrows;
  std::vector<double> res = p_.rhs;
  for (int j = 0; j < p_.ncols(); ++j) {
    const double xj = x_[static_cast<size_t>(j)];
    if (xj == 0.0) continue;
    for_col(j, [&](int r, double v) { res[static_cast<size_t>(r)] -= v * xj; });
  }
  double mx = 0.0;
  for (int r = 0; r < m; ++r) mx = std::max(mx, std::abs(res[static_cast<size_t>(r)]));
  return mx;
}

LpStatus SimplexSolver::iterate(bool phase1, const LpOptions& opt, long& iters,
                                long iter_limit) {
  const int m = p_.nrows;
  const int N = p_.ncols();
  const double dtol = std::max(opt.opt_tol, 1e-12);
  std::vector<double> y(static_cast<size_t>(m));
  std::vector<double> w(static_cast<size_t>(m));
  int degen_run = 0;
  bool bland = false;
  const double t_start = now_seconds();

  for (;;) {
    if (iters >= iter_limit) return LpStatus::IterLimit;
    if (opt.time_limit > 0 && (iters & 0xFF) == 0 &&
        now_seconds() - t_start > opt.time_limit)
      return LpStatus::IterLimit;

    // basis costs: static objective, or +-1 on violated basics
    cb_.assign(static_cast<size_t>(m), 0.0);
    bool any_infeasible = false;
    for (int i = 0; i < m; ++i) {
      const int j = basis_[static_cast<size_t>(i)];
      if (phase1) {
        const double xj = x_[static_cast<size_t>(j)];
        if (xj < lo(j) - opt.feas_tol) {
          cb_[static_cast<size_t>(i)] = -1.0;
          any_infeasible = true;
        } else if (xj > hi(j) + opt.feas_tol) {
          cb_[static_cast<size_t>(i)] = 1.0;
          any_infeasible = true;
        }
      } else {
        cb_[static_cast<size_t>(i)] = static_cost(j);
      }
    }
    if (phase1 && !any_infeasible) return LpStatus::Optimal;

    y = cb_;
    btran(y);

    // pricing
    int enter = -1;
    int dir = 0;
    double best = dtol;
    for (int j = 0; j < N; ++j) {
      const Status st = status_[static_cast<size_t>(j)];
      if (st == kBasic) continue;
      double d = phase1 ? 0.0 : static_cost(j);
      for_col(j, [&](int r, double v) { d -= y[static_cast<size_t>(r)] * v; });

      int cand_dir = 0;
      if (st == kAtLower) {
        if (d < -dtol) cand_dir = +1;
      } else if (st == kAtUpper) {
        if (d > dtol) cand_dir = -1;
      } else {  // free at zero
        if (d < -dtol) cand_dir = +1;
        else if (d > dtol) cand_dir = -1;
      }
      if (cand_dir == 0) continue;
      if (bland) {
        enter = j;
        dir = cand_dir;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        enter = j;
        dir = cand_dir;
      }
    }
    if (enter < 0) return phase1 ? LpStatus::Infeasible : LpStatus::Optimal;

    // direction of basics: dx_B = -dir * w
    std::fill(w.begin(), w.end(), 0.0);
    for_col(enter, [&](int r, double v) { w[static_cast<size_t>(r)] = v; });
    ftran(w);

    // ratio test, first-breakpoint rule
    double theta = kInf;
    int leave = -1;           // basis position; -1 = bound flip
    double leave_bound = 0.0;
    bool leave_at_lower = false;
    double best_pivot = 0.0;
    {
      const double range = hi(enter) - lo(enter);
      if (std::isfinite(range)) theta = range;
    }
    for (int i = 0; i < m; ++i) {
      const double wi = w[static_cast<size_t>(i)];
      if (std::abs(wi) <= opt.pivot_tol) continue;
      const double rate = -static_cast<double>(dir) * wi;
      const int j = basis_[static_cast<size_t>(i)];
      const double xj = x_[static_cast<size_t>(j)];
      double bound, t;
      bool at_lower;
      if (rate > 0) {
        // moving up: infeasible-below basics stop at their lower bound;
        // infeasible-above basics have no breakpoint ahead
        if (xj < lo(j) - opt.feas_tol) {
          bound = lo(j);
          at_lower = true;
        } else if (xj > hi(j) + opt.feas_tol) {
          continue;
        } else {
          bound = hi(j);
          at_lower = false;
        }
        if (!std::isfinite(bound)) continue;
        t = (bound - xj) / rate;
      } else {
        if (xj > hi(j) + opt.feas_tol) {
          bound = hi(j);
          at_lower = false;
        } else if (xj < lo(j) - opt.feas_tol) {
          continue;
        } else {
          bound = lo(j);
          at_lower = true;
        }
        if (!std::isfinite(bound)) continue;
        t = (xj - bound) / (-rate);
      }
      if (t < 0) t = 0;
      const double apiv = std::abs(wi);
      if (t < theta - 1e-10 ||
          (t < theta + 1e-10 && leave >= 0 && apiv > best_pivot)) {
        theta = t;
        leave = i;
        leave_bound = bound;
        leave_at_lower = at_lower;
        best_pivot = apiv;
      }
    }

    if (!std::isfinite(theta)) {
      if (phase1)
        throw NumericalError("phase-1 ray without breakpoint (numerical)");
      return LpStatus::Unbounded;
    }

    ++iters;
    if (theta <= 1e-11) {
      if (++degen_run > 60) bland = true;  // cycle guard
    } else {
      degen_run = 0;
      bland = false;
    }

    // apply step
    if (theta != 0.0) {
      for (int i = 0; i < m; ++i) {
        const double wi = w[static_cast<size_t>(i)];
        if (wi == 0.0) continue;
        x_[static_cast<size_t>(basis_[static_cast<size_t>(i)])] -=
            static_cast<double>(dir) * theta * wi;
      }
    }

    if (leave < 0) {
      // bound flip: land exactly on the opposite bound
      x_[static_cast<size_t>(enter)] = dir > 0 ? hi(enter) : lo(enter);
      status_[static_cast<size_t>(enter)] = dir > 0 ? kAtUpper : kAtLower;
      continue;
    }

    const int jl = basis_[static_cast<size_t>(leave)];
    x_[static_cast<size_t>(enter)] =
        x_[static_cast<size_t>(enter)] + static_cast<double>(dir) * theta;
    x_[static_cast<size_t>(jl)] = leave_bound;
    status_[static_cast<size_t>(jl)] = leave_at_lower ? kAtLower : kAtUpper;
    status_[static_cast<size_t>(enter)] = kBasic;
    basis_[static_cast<size_t>(leave)] = enter;

    Eta eta;
    eta.pos = leave;
    eta.pivot = w[static_cast<size_t>(leave)];
    for (int i = 0; i < m; ++i) {
      const double wi = w[static_cast<size_t>(i)];
      if (i != leave && wi != 0.0) eta.entries.push_back({i, wi});
    }
    etas_.push_back(std::move(eta));

    if (static_cast<int>(etas_.size()) >= opt.refactor_interval) {
      factorize();
      compute_basic_values();
    }
  }
}

LpResult SimplexSolver::solve(std::span<const double> lo,
                              std::span<const double> hi,
                              const LpOptions& opt) {
  lo_store_.assign(lo.begin(), lo.end());
  hi_store_.assign(hi.begin(), hi.end());

  LpResult out;
  const long iter_limit =
      opt.iteration_limit > 0
          ? opt.iteration_limit
          : 20000 + 40L * (p_.nrows + p_.nstruct);

  reset_basis();
  factorize();
  compute_basic_values();

  long iters = 0;
  for (int round = 0; round < 4; ++round) {
    double max_viol = 0.0;
    infeasibility(&max_viol);
    if (max_viol > opt.feas_tol) {
      const LpStatus st = iterate(true, opt, iters, iter_limit);
      if (st == LpStatus::IterLimit) {
        out.status = st;
        out.iterations = iters;
        return out;
      }
      factorize();
      compute_basic_values();
      infeasibility(&max_viol);
      if (st == LpStatus::Infeasible || max_viol > 1e-7) {
        out.status = LpStatus::Infeasible;
        out.iterations = iters;
        return out;
      }
    }

    const LpStatus st = iterate(false, opt, iters, iter_limit);
    if (st == LpStatus::Unbounded || st == LpStatus::IterLimit) {
      out.status = st;
      out.iterations = iters;
      return out;
    }

    // clean verification pass on a fresh factorization
    factorize();
    compute_basic_values();
    infeasibility(&max_viol);
    if (max_viol <= 1e-8) break;
    if (round == 3)
      throw NumericalError("LP solve could not restore primal feasibility");
  }

  if (residual_norm() > 1e-6)
    throw NumericalError("row residual above 1e-6 after refactorization");

  out.status = LpStatus::Optimal;
  out.iterations = iters;
  out.x.resize(static_cast<size_t>(p_.nstruct));
  double obj = 0.0;
  for (int j = 0; j < p_.nstruct; ++j) {
    double v = x_[static_cast<size_t>(j)];
    const double l = lo_store_[static_cast<size_t>(j)];
    const double u = hi_store_[static_cast<size_t>(j)];
    if (v < l && v > l - 5e-8) v = l;
    if (v > u && v < u + 5e-8) v = u;
    out.x[static_cast<size_t>(j)] = v;
    obj += p_.cost[static_cast<size_t>(j)] * v;
  }
  out.objective = obj;
  return out;
}

}  // namespace dhplan::detail
