#include "dhplan/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>

#include "dhplan/errors.hpp"
#include "simplex.hpp"

namespace dhplan {

namespace {

using detail::LpOptions;
using detail::LpProblem;
using detail::LpResult;
using detail::LpStatus;
using detail::SimplexSolver;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

LpProblem make_lp_problem(const MilpModel& model, const SolveRequest& req) {
  LpProblem p;
  p.nstruct = model.num_variables();
  const auto& rows = model.constraints();
  const int m = static_cast<int>(rows.size() + req.extra_rows.size());
  p.nrows = m;

  auto row_at = [&](int r) -> const LinConstraint& {
    const int base = static_cast<int>(rows.size());
    return r < base ? rows[static_cast<size_t>(r)]
                    : req.extra_rows[static_cast<size_t>(r - base)];
  };

  // CSC, duplicates within a column coalesced
  std::vector<int> count(static_cast<size_t>(p.nstruct), 0);
  for (int r = 0; r < m; ++r)
    for (const auto& t : row_at(r).terms) ++count[static_cast<size_t>(t.var)];
  std::vector<int> rawptr(static_cast<size_t>(p.nstruct) + 1, 0);
  for (int j = 0; j < p.nstruct; ++j)
    rawptr[static_cast<size_t>(j) + 1] =
        rawptr[static_cast<size_t>(j)] + count[static_cast<size_t>(j)];
  std::vector<int> rawind(static_cast<size_t>(rawptr.back()));
  std::vector<double> rawval(static_cast<size_t>(rawptr.back()));
  std::vector<int> fill(rawptr.begin(), rawptr.end() - 1);
  for (int r = 0; r < m; ++r) {
    for (const auto& t : row_at(r).terms) {
      const int k = fill[static_cast<size_t>(t.var)]++;
      rawind[static_cast<size_t>(k)] = r;
      rawval[static_cast<size_t>(k)] = t.coef;
    }
  }
  p.colptr.assign(1, 0);
  p.rowind.clear();
  p.value.clear();
  p.rowind.reserve(rawind.size());
  p.value.reserve(rawval.size());
  std::vector<std::pair<int, double>> col;
  for (int j = 0; j < p.nstruct; ++j) {
    col.clear();
    for (int k = rawptr[static_cast<size_t>(j)];
         k < rawptr[static_cast<size_t>(j) + 1]; ++k)
      col.push_back({rawind[static_cast<size_t>(k)], rawval[static_cast<size_t>(k)]});
    std::sort(col.begin(), col.end(),
              [](const auto& a, const auto& c) { return a.first < c.first; });
    for (size_t k = 0; k < col.size(); ++k) {
      if (!p.rowind.empty() &&
          static_cast<int>(p.rowind.size()) > p.colptr.back() &&
          p.rowind.back() == col[k].first) {
        p.value.back() += col[k].second;
      } else {
        p.rowind.push_back(col[k].first);
        p.value.push_back(col[k].second);
      }
    }
    p.colptr.push_back(static_cast<int>(p.rowind.size()));
  }

  p.cost.assign(static_cast<size_t>(p.nstruct), 0.0);
  for (const auto& t : model.objective(req.objective).terms)
    p.cost[static_cast<size_t>(t.var)] += t.coef;

  p.lower.resize(static_cast<size_t>(p.nstruct));
  p.upper.resize(static_cast<size_t>(p.nstruct));
  for (int j = 0; j < p.nstruct; ++j) {
    const VarRef& v = model.variable(j);
    p.lower[static_cast<size_t>(j)] = v.lower;
    p.upper[static_cast<size_t>(j)] = v.upper;
  }

  p.slack_lower.resize(static_cast<size_t>(m));
  p.slack_upper.resize(static_cast<size_t>(m));
  p.rhs.resize(static_cast<size_t>(m));
  for (int r = 0; r < m; ++r) {
    const LinConstraint& row = row_at(r);
    p.rhs[static_cast<size_t>(r)] = row.rhs;
    switch (row.sense) {
      case Sense::LE:
        p.slack_lower[static_cast<size_t>(r)] = 0.0;
        p.slack_upper[static_cast<size_t>(r)] = kInf;
        break;
      case Sense::EQ:
        p.slack_lower[static_cast<size_t>(r)] = 0.0;
        p.slack_upper[static_cast<size_t>(r)] = 0.0;
        break;
      case Sense::GE:
        p.slack_lower[static_cast<size_t>(r)] = -kInf;
        p.slack_upper[static_cast<size_t>(r)] = 0.0;
        break;
    }
  }
  return p;
}

void check_size(const MilpModel& model, const SolveRequest& req,
                const SolveConfig& config) {
  std::int64_t nnz = model.num_nonzeros();
  for (const auto& r : req.extra_rows) nnz += static_cast<std::int64_t>(r.terms.size());
  if (nnz > config.max_nonzeros)
    throw Error("model has " + std::to_string(nnz) +
                " nonzeros, beyond the built-in desk-scale limit of " +
                std::to_string(config.max_nonzeros) +
                "; export it to an external solver instead");
}

LpOptions lp_options(const SolveConfig& config, double remaining_time) {
  LpOptions o;
  o.pivot_tol = config.lp_pivot_tolerance;
  o.time_limit = std::isfinite(remaining_time) ? std::max(remaining_time, 0.01) : 0.0;
  return o;
}

SolveStatus map_lp_status(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return SolveStatus::Optimal;
    case LpStatus::Infeasible: return SolveStatus::Infeasible;
    case LpStatus::Unbounded: return SolveStatus::Unbounded;
    case LpStatus::IterLimit: return SolveStatus::LimitReached;
  }
  return SolveStatus::LimitReached;
}

struct BinaryInfo {
  std::vector<int> vars;  // model indices of binary variables
};

BinaryInfo binary_info(const MilpModel& model) {
  BinaryInfo b;
  for (const auto& v : model.variables())
    if (v.kind == VarKind::Binary) b.vars.push_back(v.index);
  return b;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::GapReached: return "gap_reached";
    case SolveStatus::LimitReached: return "limit_reached";
  }
  return "unknown";
}

SolveResult solve_lp(const MilpModel& model, const SolveRequest& req,
                     const SolveConfig& config) {
  check_size(model, req, config);
  const double t0 = now_seconds();
  SolveResult out;
  if (model.structurally_infeasible()) {
    out.status = SolveStatus::Infeasible;
    return out;
  }
  LpProblem p = make_lp_problem(model, req);
  SimplexSolver solver(p);
  LpResult lp = solver.solve(p.lower, p.upper, lp_options(config, config.time_limit));
  out.status = map_lp_status(lp.status);
  out.iteration_count = lp.iterations;
  out.node_count = 0;
  if (lp.status == LpStatus::Optimal) {
    out.assignment = lp.x;
    out.objective_value = lp.objective + model.objective(req.objective).constant;
    out.best_bound = out.objective_value;
    out.rel_gap = 0.0;
  }
  out.wall_time = now_seconds() - t0;
  return out;
}

namespace {

/// Shared state of one branch-and-bound run.
class BnbRun {
 public:
  BnbRun(const MilpModel& model, const SolveRequest& req,
         const SolveConfig& config)
      : model_(model),
        config_(config),
        obj_constant_(model.objective(req.objective).constant),
        p_(make_lp_problem(model, req)),
        solver_(p_),
        bin_(binary_info(model)),
        t0_(now_seconds()) {}

  SolveResult run() {
    SolveResult out;
    if (model_.structurally_infeasible()) {
      out.status = SolveStatus::Infeasible;
      return out;
    }

    Node root;
    root.id = next_id_++;
    root.bound = -kInf;
    push_node(std::move(root));

    bool limit_hit = false;
    while (!open_.empty()) {
      if (config_.node_limit >= 0 && nodes_ >= config_.node_limit) {
        limit_hit = true;
        break;
      }
      if (now_seconds() - t0_ > config_.time_limit) {
        limit_hit = true;
        break;
      }
      Node node = pop_best();
      if (prune_by_bound(node.bound)) continue;
      if (gap_closed()) break;
      const bool ok = process(node, limit_hit);
      if (!ok) break;  // unbounded or hard limit inside LP
      if (gap_closed()) break;
    }

    out.node_count = nodes_;
    out.iteration_count = iters_;
    out.wall_time = now_seconds() - t0_;
    if (unbounded_) {
      out.status = SolveStatus::Unbounded;
      return out;
    }
    const double bound = global_bound();
    out.best_bound = bound + obj_constant_;
    if (has_incumbent_) {
      out.assignment = incumbent_x_;
      out.objective_value = incumbent_obj_ + obj_constant_;
      out.rel_gap = rel_gap(incumbent_obj_, bound);
      if (limit_hit && !open_.empty())
        out.status = SolveStatus::LimitReached;
      else if (out.rel_gap <= 1e-9)
        out.status = SolveStatus::Optimal;
      else
        out.status = SolveStatus::GapReached;
      if (out.status == SolveStatus::Optimal) out.rel_gap = std::max(out.rel_gap, 0.0);
    } else {
      out.status = limit_hit ? SolveStatus::LimitReached : SolveStatus::Infeasible;
      out.rel_gap = kInf;
    }
    return out;
  }

 private:
  struct Node {
    double bound = -kInf;  // parent LP bound (selection key)
    long id = 0;
    std::vector<std::pair<int, int>> fixes;  // (binary var, 0/1)
    int branch_var = -1;   // var fixed to create this node
    int branch_dir = 0;    // 0: down, 1: up
    double parent_frac = 0.0;
    double parent_obj = 0.0;
  };

  struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
      if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
      return a.id > b.id;
    }
  };

  void push_node(Node n) { open_.push(std::move(n)); }

  Node pop_best() {
    Node n = open_.top();
    open_.pop();
    return n;
  }

  double rel_gap(double inc, double bound) const {
    if (!std::isfinite(inc)) return kInf;
    const double denom = std::max(std::abs(inc), 1e-10);
    return std::max(0.0, (inc - bound) / denom);
  }

  double global_bound() const {
    double b = has_incumbent_ ? incumbent_obj_ : kInf;
    if (!open_.empty()) b = std::min(b, open_.top().bound);
    if (dive_bound_valid_) b = std::min(b, dive_bound_);
    return b;
  }

  bool gap_closed() const {
    if (!has_incumbent_) return false;
    return rel_gap(incumbent_obj_, global_bound()) <= config_.rel_gap;
  }

  bool prune_by_bound(double bound) const {
    if (!has_incumbent_) return false;
    return bound >= incumbent_obj_ - 1e-9 * std::max(1.0, std::abs(incumbent_obj_));
  }

  void apply_fixes(const std::vector<std::pair<int, int>>& fixes,
                   std::vector<double>& lo, std::vector<double>& hi) const {
    lo = p_.lower;
    hi = p_.upper;
    for (const auto& [v, val] : fixes) {
      lo[static_cast<size_t>(v)] = val;
      hi[static_cast<size_t>(v)] = val;
    }
  }

  /// Solves one node LP; creates children or an incumbent. Returns
  /// false to abort the whole search (unbounded / LP iteration break).
  bool process(Node node, bool& limit_hit) {
    std::vector<double> lo, hi;
    // depth-first plunge: keep diving on the preferred child until the
    // subtree closes, then fall back to best-bound selection
    std::optional<Node> current = std::move(node);
    while (current) {
      Node cur = std::move(*current);
      current.reset();
      if (prune_by_bound(cur.bound)) break;
      if (gap_closed()) {
        // keep the unexplored subtree's bound visible to the caller
        push_node(std::move(cur));
        dive_bound_valid_ = false;
        return true;
      }

      apply_fixes(cur.fixes, lo, hi);
      const double remaining = config_.time_limit - (now_seconds() - t0_);
      if (remaining <= 0) {
        limit_hit = true;
        // bound info of the unprocessed node still counts
        push_node(std::move(cur));
        dive_bound_valid_ = false;
        return true;
      }
      dive_bound_ = cur.bound;
      dive_bound_valid_ = true;
      LpResult lp = solver_.solve(lo, hi, lp_options(config_, remaining));
      ++nodes_;
      iters_ += lp.iterations;

      if (lp.status == LpStatus::Unbounded) {
        unbounded_ = true;
        dive_bound_valid_ = false;
        return false;
      }
      if (lp.status == LpStatus::IterLimit) {
        limit_hit = true;
        push_node(std::move(cur));
        dive_bound_valid_ = false;
        return true;
      }
      if (lp.status == LpStatus::Infeasible) {
        dive_bound_valid_ = false;
        update_pseudo(cur, kInf);
        break;
      }

      const double bound = lp.objective;
      dive_bound_ = bound;
      update_pseudo(cur, bound);
      if (has_incumbent_ &&
          bound >= incumbent_obj_ - 1e-9 * std::max(1.0, std::abs(incumbent_obj_))) {
        dive_bound_valid_ = false;
        break;
      }

      const int frac_var = pick_branch_var(lp.x);
      if (frac_var < 0) {
        offer_incumbent(lp.x, bound);
        dive_bound_valid_ = false;
        break;
      }

      if (nodes_ == 1 && config_.root_heuristic) root_heuristic(lp.x, lo, hi);

      const double xv = lp.x[static_cast<size_t>(frac_var)];
      const int pref = xv >= 0.5 ? 1 : 0;

      Node up, down;
      up.fixes = cur.fixes;
      up.fixes.push_back({frac_var, 1});
      up.bound = bound;
      up.branch_var = frac_var;
      up.branch_dir = 1;
      up.parent_frac = xv;
      up.parent_obj = bound;
      down.fixes = std::move(cur.fixes);
      down.fixes.push_back({frac_var, 0});
      down.bound = bound;
      down.branch_var = frac_var;
      down.branch_dir = 0;
      down.parent_frac = xv;
      down.parent_obj = bound;

      if (pref == 1) {
        up.id = next_id_++;
        down.id = next_id_++;
        push_node(std::move(down));
        current = std::move(up);
      } else {
        down.id = next_id_++;
        up.id = next_id_++;
        push_node(std::move(up));
        current = std::move(down);
      }
    }
    dive_bound_valid_ = false;
    return true;
  }

  int pick_branch_var(const std::vector<double>& x) const {
    int best = -1;
    double best_score = -1.0;
    for (const int v : bin_.vars) {
      const double xv = x[static_cast<size_t>(v)];
      const double frac = xv - std::floor(xv);
      const double dist = std::min(frac, 1.0 - frac);
      if (dist <= config_.integer_tolerance) continue;
      double score;
      if (config_.branching == BranchingRule::PseudoCost) {
        const double up = pseudo_estimate(v, 1) * (1.0 - frac);
        const double down = pseudo_estimate(v, 0) * frac;
        score = std::max(up, 1e-6) * std::max(down, 1e-6);
      } else {
        score = dist;
      }
      if (score > best_score) {
        best_score = score;
        best = v;
      }
    }
    return best;
  }

  double pseudo_estimate(int var, int dir) const {
    const auto& m = dir ? pseudo_up_ : pseudo_down_;
    auto it = m.find(var);
    if (it == m.end() || it->second.second == 0) return 1.0;
    return it->second.first / static_cast<double>(it->second.second);
  }

  void update_pseudo(const Node& n, double child_bound) {
    if (config_.branching != BranchingRule::PseudoCost) return;
    if (n.branch_var < 0 || !std::isfinite(child_bound)) return;
    const double denom = n.branch_dir ? (1.0 - n.parent_frac) : n.parent_frac;
    if (denom < 1e-9) return;
    const double delta = std::max(0.0, child_bound - n.parent_obj) / denom;
    auto& m = n.branch_dir ? pseudo_up_ : pseudo_down_;
    auto& cell = m[n.branch_var];
    cell.first += delta;
    cell.second += 1;
  }

  void offer_incumbent(const std::vector<double>& x, double obj) {
    if (!has_incumbent_ || obj < incumbent_obj_) {
      incumbent_obj_ = obj;
      incumbent_x_ = x;
      has_incumbent_ = true;
    }
  }

  /// Rounding heuristic: fix all binaries to rounded LP values (start
  /// and stop indicators recomputed through the implication list), then
  /// solve the continuous rest. Two variants: nearest rounding and
  /// commit-leaning ceil.
  void root_heuristic(const std::vector<double>& x, std::vector<double>& lo,
                      std::vector<double>& hi) {
    std::vector<char> implied(static_cast<size_t>(model_.num_variables()), 0);
    for (const auto& imp : model_.implications())
      implied[static_cast<size_t>(imp.implied)] = 1;

    for (int variant = 0; variant < 2; ++variant) {
      std::vector<double> fixed(x);
      for (const int v : bin_.vars) {
        if (implied[static_cast<size_t>(v)]) continue;
        const double xv = fixed[static_cast<size_t>(v)];
        double val;
        if (variant == 0)
          val = xv >= 0.5 ? 1.0 : 0.0;
        else
          val = xv > config_.integer_tolerance ? 1.0 : 0.0;
        // honor node bounds (the root has none, but stay safe)
        val = std::min(std::max(val, p_.lower[static_cast<size_t>(v)]),
                       p_.upper[static_cast<size_t>(v)]);
        fixed[static_cast<size_t>(v)] = val;
      }
      for (const auto& imp : model_.implications()) {
        const double pos = imp.pos >= 0 ? fixed[static_cast<size_t>(imp.pos)] : 1.0;
        const double neg = imp.neg >= 0 ? fixed[static_cast<size_t>(imp.neg)] : 0.0;
        fixed[static_cast<size_t>(imp.implied)] = pos * (1.0 - neg);
      }

      lo = p_.lower;
      hi = p_.upper;
      bool in_bounds = true;
      for (const int v : bin_.vars) {
        const double val = fixed[static_cast<size_t>(v)];
        if (val < lo[static_cast<size_t>(v)] - 1e-12 ||
            val > hi[static_cast<size_t>(v)] + 1e-12) {
          in_bounds = false;
          break;
        }
        lo[static_cast<size_t>(v)] = val;
        hi[static_cast<size_t>(v)] = val;
      }
      if (!in_bounds) continue;
      const double remaining = config_.time_limit - (now_seconds() - t0_);
      if (remaining <= 0) return;
      LpResult lp = solver_.solve(lo, hi, lp_options(config_, remaining));
      iters_ += lp.iterations;
      if (lp.status == LpStatus::Optimal) offer_incumbent(lp.x, lp.objective);
    }
  }

  const MilpModel& model_;
  const SolveConfig& config_;
  double obj_constant_;
  LpProblem p_;
  SimplexSolver solver_;
  BinaryInfo bin_;
  double t0_;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open_;
  long next_id_ = 0;
  long nodes_ = 0;
  long iters_ = 0;
  bool unbounded_ = false;

  bool has_incumbent_ = false;
  double incumbent_obj_ = kInf;
  std::vector<double> incumbent_x_;

  double dive_bound_ = -kInf;
  bool dive_bound_valid_ = false;

  std::map<int, std::pair<double, long>> pseudo_up_;
  std::map<int, std::pair<double, long>> pseudo_down_;
};

}  // namespace

SolveResult branch_and_bound(const MilpModel& model, const SolveRequest& req,
                             const SolveConfig& config) {
  check_size(model, req, config);
  BnbRun run(model, req, config);
  return run.run();
}

SolveResult brute_force(const MilpModel& model, const SolveRequest& req,
                        const SolveConfig& config, int binary_limit) {
  const double t0 = now_seconds();
  BinaryInfo bin = binary_info(model);
  const int B = static_cast<int>(bin.vars.size());
  if (B > binary_limit)
    throw Error("brute_force refuses " + std::to_string(B) +
                " binaries (limit " + std::to_string(binary_limit) + ")");

  SolveResult out;
  if (model.structurally_infeasible()) {
    out.status = SolveStatus::Infeasible;
    return out;
  }
  LpProblem p = make_lp_problem(model, req);
  SimplexSolver solver(p);
  LpOptions opt = lp_options(config, kInf);

  std::vector<double> lo, hi;
  bool any_feasible = false;
  bool any_unbounded = false;
  double best_obj = kInf;
  std::vector<double> best_x;

  const std::uint64_t total = 1ull << B;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    lo = p.lower;
    hi = p.upper;
    for (int i = 0; i < B; ++i) {
      const double v = (mask >> i) & 1ull ? 1.0 : 0.0;
      lo[static_cast<size_t>(bin.vars[static_cast<size_t>(i)])] = v;
      hi[static_cast<size_t>(bin.vars[static_cast<size_t>(i)])] = v;
    }
    LpResult lp = solver.solve(lo, hi, opt);
    out.iteration_count += lp.iterations;
    ++out.node_count;
    if (lp.status == LpStatus::Unbounded) any_unbounded = true;
    if (lp.status != LpStatus::Optimal) continue;
    if (!any_feasible || lp.objective < best_obj) {
      any_feasible = true;
      best_obj = lp.objective;
      best_x = std::move(lp.x);
    }
  }

  const double constant = model.objective(req.objective).constant;
  if (any_unbounded) {
    out.status = SolveStatus::Unbounded;
  } else if (any_feasible) {
    out.status = SolveStatus::Optimal;
    out.assignment = std::move(best_x);
    out.objective_value = best_obj + constant;
    out.best_bound = out.objective_value;
    out.rel_gap = 0.0;
  } else {
    out.status = SolveStatus::Infeasible;
  }
  out.wall_time = now_seconds() - t0;
  return out;
}

bool AuditReport::clean(double row_tol, double bound_tol, double int_tol) const {
  if (max_row_residual > row_tol) return false;
  for (const auto& b : bound_violations)
    if (b.amount > bound_tol) return false;
  for (const auto& v : integrality_violations) {
    const double frac = v.value - std::floor(v.value);
    if (std::min(frac, 1.0 - frac) > int_tol) return false;
  }
  return true;
}

AuditReport audit_solution(const MilpModel& model,
                           std::span<const double> assignment,
                           std::span<const LinConstraint> extra_rows) {
  if (static_cast<int>(assignment.size()) != model.num_variables())
    throw Error("assignment covers " + std::to_string(assignment.size()) +
                " of " + std::to_string(model.num_variables()) + " variables");
  AuditReport rep;
  auto audit_row = [&](const LinConstraint& row) {
    double lhs = 0.0;
    for (const auto& t : row.terms)
      lhs += t.coef * assignment[static_cast<size_t>(t.var)];
    double viol = 0.0;
    switch (row.sense) {
      case Sense::LE: viol = std::max(0.0, lhs - row.rhs); break;
      case Sense::GE: viol = std::max(0.0, row.rhs - lhs); break;
      case Sense::EQ: viol = std::abs(lhs - row.rhs); break;
    }
    if (viol > rep.max_row_residual) {
      rep.max_row_residual = viol;
      rep.worst_row = {row.name, viol};
    }
  };
  for (const auto& row : model.constraints()) audit_row(row);
  for (const auto& row : extra_rows) audit_row(row);

  for (const auto& v : model.variables()) {
    const double xv = assignment[static_cast<size_t>(v.index)];
    double amount = 0.0;
    if (xv < v.lower) amount = v.lower - xv;
    else if (xv > v.upper) amount = xv - v.upper;
    if (amount > 0.0)
      rep.bound_violations.push_back({v.index, v.name, xv, amount});
    if (v.kind == VarKind::Binary) {
      const double frac = xv - std::floor(xv);
      if (std::min(frac, 1.0 - frac) > 1e-12)
        rep.integrality_violations.push_back({v.index, v.name, xv});
    }
  }
  return rep;
}

}  // namespace dhplan
