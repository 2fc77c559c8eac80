#include "dpsynth/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpsynth/errors.hpp"

namespace dpsynth {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

// Dense full-tableau simplex over the standard form produced below.
class SimplexTableau {
 public:
  SimplexTableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, -1) {}

  double* row(std::size_t r) { return t_.data() + r * (cols_ + 1); }
  const double* row(std::size_t r) const { return t_.data() + r * (cols_ + 1); }
  double* obj() { return row(rows_); }
  double& rhs(std::size_t r) { return row(r)[cols_]; }
  double& value() { return obj()[cols_]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<int>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    double* prow = row(pr);
    const double p = prow[pc];
    const double invp = 1.0 / p;
    for (std::size_t j = 0; j <= cols_; ++j) prow[j] *= invp;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      double* rr = row(r);
      const double f = rr[pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) rr[j] -= f * prow[j];
      rr[pc] = 0.0;
    }
    basis_[pr] = static_cast<int>(pc);
  }

  // Returns true on optimality, throws CapacityError on pivot-budget
  // exhaustion. `allowed` marks columns that may enter (used to freeze the
  // artificials in phase 2). Sets *unbounded when a column has no blocking row.
  bool run(const std::vector<char>& allowed, bool* unbounded, std::size_t max_pivots) {
    *unbounded = false;
    std::size_t pivots = 0;
    std::size_t stall = 0;
    const std::size_t stall_limit = 200 + 2 * rows_;
    bool bland = false;
    double last_value = value();
    while (true) {
      const double* costs = obj();
      int pc = -1;
      if (!bland) {
        double best = -kCostTol;
        for (std::size_t j = 0; j < cols_; ++j)
          if (allowed[j] && costs[j] < best) {
            best = costs[j];
            pc = static_cast<int>(j);
          }
      } else {
        for (std::size_t j = 0; j < cols_; ++j)
          if (allowed[j] && costs[j] < -kCostTol) {
            pc = static_cast<int>(j);
            break;
          }
      }
      if (pc < 0) return true;

      int pr = -1;
      double best_ratio = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = row(r)[static_cast<std::size_t>(pc)];
        if (a <= kPivotTol) continue;
        const double ratio = row(r)[cols_] / a;
        if (pr < 0 || ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && bland && basis_[r] < basis_[pr])) {
          pr = static_cast<int>(r);
          best_ratio = ratio;
        }
      }
      if (pr < 0) {
        *unbounded = true;
        return false;
      }
      pivot(static_cast<std::size_t>(pr), static_cast<std::size_t>(pc));
      if (++pivots > max_pivots)
        throw std::runtime_error(
            "lp_solve: pivot budget exhausted after " + std::to_string(pivots) +
            " pivots (rows=" + std::to_string(rows_) + ", cols=" + std::to_string(cols_) + ")");
      // The objective cell stores -z, so progress on min z shows as growth.
      if (value() > last_value + 1e-12) {
        last_value = value();
        stall = 0;
      } else if (++stall > stall_limit) {
        bland = true;  // anti-cycling from here on
      }
    }
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> t_;
  std::vector<int> basis_;
};

}  // namespace

std::size_t LPProblem::nonzero_count() const {
  std::size_t nz = 0;
  for (const auto& r : eq_rows) nz += r.entries.size();
  for (const auto& r : le_rows) nz += r.entries.size();
  return nz;
}

void LPProblem::validate() const {
  if (n_vars <= 0) throw std::invalid_argument("LPProblem: no variables");
  if (static_cast<int>(objective.size()) != n_vars ||
      static_cast<int>(lower.size()) != n_vars || static_cast<int>(upper.size()) != n_vars)
    throw std::invalid_argument("LPProblem: inconsistent dimensions");
  if (eq_rows.size() != eq_rhs.size() || le_rows.size() != le_rhs.size())
    throw std::invalid_argument("LPProblem: row/rhs count mismatch");
  auto check_rows = [&](const std::vector<SparseRow>& rows) {
    for (const auto& r : rows)
      for (const auto& [c, v] : r.entries) {
        if (c < 0 || c >= n_vars) throw std::invalid_argument("LPProblem: column out of range");
        if (!std::isfinite(v)) throw std::invalid_argument("LPProblem: non-finite coefficient");
      }
  };
  check_rows(eq_rows);
  check_rows(le_rows);
  for (double v : objective)
    if (!std::isfinite(v)) throw std::invalid_argument("LPProblem: non-finite objective");
  for (double v : eq_rhs)
    if (!std::isfinite(v)) throw std::invalid_argument("LPProblem: non-finite rhs");
  for (double v : le_rhs)
    if (!std::isfinite(v)) throw std::invalid_argument("LPProblem: non-finite rhs");
  for (int j = 0; j < n_vars; ++j)
    if (!(lower[j] <= upper[j])) throw std::invalid_argument("LPProblem: empty variable bound");
  if (nonzero_count() > guards::kMaxLPNonzeros)
    throw CapacityError("lp_solve: problem exceeds the nonzero guard");
}

LPSolution lp_solve(const LPProblem& problem) {
  problem.validate();
  const int n = problem.n_vars;

  // Standard-form translation. Shifted variables x = x' + lower (or mirrored
  // when only the upper bound is finite); free variables split into x+ - x-.
  // Finite ranges add an explicit upper-bound row on the shifted variable.
  struct VarMap {
    int col = -1;       // primary standard-form column
    int neg_col = -1;   // second column for split free variables
    double shift = 0.0; // x = sign * x' + shift
    double sign = 1.0;
  };
  std::vector<VarMap> vmap(n);
  int ncols_struct = 0;
  for (int j = 0; j < n; ++j) {
    VarMap m;
    if (std::isfinite(problem.lower[j])) {
      m.col = ncols_struct++;
      m.shift = problem.lower[j];
    } else if (std::isfinite(problem.upper[j])) {
      m.col = ncols_struct++;
      m.shift = problem.upper[j];
      m.sign = -1.0;
    } else {
      m.col = ncols_struct++;
      m.neg_col = ncols_struct++;
    }
    vmap[j] = m;
  }

  struct StdRow {
    std::vector<std::pair<int, double>> entries;
    double rhs = 0.0;
    bool is_eq = false;
  };
  std::vector<StdRow> rows;
  rows.reserve(problem.eq_rows.size() + problem.le_rows.size() + static_cast<std::size_t>(n));

  auto translate = [&](const SparseRow& src, double rhs, bool is_eq) {
    StdRow r;
    r.is_eq = is_eq;
    r.rhs = rhs;
    for (const auto& [c, v] : src.entries) {
      const VarMap& m = vmap[c];
      r.rhs -= v * m.shift;
      r.entries.emplace_back(m.col, v * m.sign);
      if (m.neg_col >= 0) r.entries.emplace_back(m.neg_col, -v);
    }
    rows.push_back(std::move(r));
  };
  for (std::size_t i = 0; i < problem.eq_rows.size(); ++i)
    translate(problem.eq_rows[i], problem.eq_rhs[i], true);
  for (std::size_t i = 0; i < problem.le_rows.size(); ++i)
    translate(problem.le_rows[i], problem.le_rhs[i], false);
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(problem.lower[j]) && std::isfinite(problem.upper[j]) &&
        problem.upper[j] > problem.lower[j]) {
      StdRow r;
      r.entries.emplace_back(vmap[j].col, 1.0);
      r.rhs = problem.upper[j] - problem.lower[j];
      rows.push_back(std::move(r));
    }
    // lower == upper pins the variable through its shift plus a zero upper
    // bound row; handled by the branch above degenerating to rhs 0.
    if (std::isfinite(problem.lower[j]) && problem.lower[j] == problem.upper[j]) {
      StdRow r;
      r.entries.emplace_back(vmap[j].col, 1.0);
      r.rhs = 0.0;
      rows.push_back(std::move(r));
    }
  }

  const std::size_t m = rows.size();
  // Columns: structural | slacks (one per <= row) | artificials (as needed).
  std::size_t n_slack = 0;
  for (const auto& r : rows)
    if (!r.is_eq) ++n_slack;

  // Normalize rhs >= 0 (flipping rows), then decide basis: slack for <= rows
  // with the slack coefficient +1, artificial otherwise.
  std::vector<double> slack_sign(m, 0.0);
  std::size_t n_art = 0;
  {
    std::size_t si = 0;
    for (auto& r : rows) {
      double flip = r.rhs < 0 ? -1.0 : 1.0;
      if (flip < 0) {
        r.rhs = -r.rhs;
        for (auto& [c, v] : r.entries) v = -v;
      }
      if (!r.is_eq) {
        slack_sign[si] = flip;  // slack coefficient after the flip
        ++si;
      }
    }
  }
  // Count artificials: eq rows always, <= rows whose slack flipped negative.
  {
    std::size_t si = 0;
    for (const auto& r : rows) {
      if (r.is_eq) {
        ++n_art;
      } else {
        if (slack_sign[si] < 0) ++n_art;
        ++si;
      }
    }
  }

  const std::size_t cols = static_cast<std::size_t>(ncols_struct) + n_slack + n_art;
  SimplexTableau tab(m, cols);

  std::vector<char> is_artificial(cols, 0);
  {
    std::size_t si = 0, ai = 0;
    std::size_t slack_base = static_cast<std::size_t>(ncols_struct);
    std::size_t art_base = slack_base + n_slack;
    for (std::size_t r = 0; r < m; ++r) {
      double* tr = tab.row(r);
      for (const auto& [c, v] : rows[r].entries) tr[static_cast<std::size_t>(c)] += v;
      tab.rhs(r) = rows[r].rhs;
      if (!rows[r].is_eq) {
        tr[slack_base + si] = slack_sign[si];
        if (slack_sign[si] > 0) {
          tab.basis()[r] = static_cast<int>(slack_base + si);
        }
        ++si;
      }
      if (tab.basis()[r] < 0) {
        const std::size_t ac = art_base + ai++;
        tr[ac] = 1.0;
        is_artificial[ac] = 1;
        tab.basis()[r] = static_cast<int>(ac);
      }
    }
  }

  const std::size_t max_pivots = 20000 + 40 * (m + cols);
  LPSolution sol;

  // Phase 1: minimize the artificial sum.
  {
    bool need_phase1 = n_art > 0;
    if (need_phase1) {
      double* obj = tab.obj();
      for (std::size_t j = 0; j < cols; ++j) obj[j] = is_artificial[j] ? 1.0 : 0.0;
      // Price out the basic artificials.
      for (std::size_t r = 0; r < m; ++r) {
        if (is_artificial[static_cast<std::size_t>(tab.basis()[r])]) {
          const double* tr = tab.row(r);
          for (std::size_t j = 0; j <= cols; ++j) obj[j] -= tr[j];
        }
      }
      std::vector<char> allowed(cols, 1);
      bool unbounded = false;
      tab.run(allowed, &unbounded, max_pivots);
      if (-tab.value() > 1e-7) {
        sol.status = LPStatus::Infeasible;
        return sol;
      }
      // Drive remaining artificials (basic at zero) out of the basis so they
      // cannot re-enter through a degenerate row in phase 2. Rows that are
      // zero in every structural column are redundant and stay inert.
      for (std::size_t r = 0; r < m; ++r) {
        if (!is_artificial[static_cast<std::size_t>(tab.basis()[r])]) continue;
        const double* tr = tab.row(r);
        for (std::size_t j = 0; j < cols; ++j) {
          if (!is_artificial[j] && std::abs(tr[j]) > kPivotTol) {
            tab.pivot(r, j);
            break;
          }
        }
      }
    }
  }

  // Phase 2.
  {
    double* obj = tab.obj();
    for (std::size_t j = 0; j <= cols; ++j) obj[j] = 0.0;
    for (int j = 0; j < n; ++j) {
      const double cj = problem.objective[j];
      if (cj == 0.0) continue;
      obj[static_cast<std::size_t>(vmap[j].col)] += cj * vmap[j].sign;
      if (vmap[j].neg_col >= 0) obj[static_cast<std::size_t>(vmap[j].neg_col)] -= cj;
    }
    // Price out the current basis.
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t b = static_cast<std::size_t>(tab.basis()[r]);
      const double cb = obj[b];
      if (cb == 0.0) continue;
      const double* tr = tab.row(r);
      for (std::size_t j = 0; j <= cols; ++j) obj[j] -= cb * tr[j];
      obj[b] = 0.0;
    }
    std::vector<char> allowed(cols, 1);
    for (std::size_t j = 0; j < cols; ++j)
      if (is_artificial[j]) allowed[j] = 0;
    bool unbounded = false;
    tab.run(allowed, &unbounded, max_pivots);
    if (unbounded) {
      sol.status = LPStatus::Unbounded;
      return sol;
    }
  }

  // Extract and untransform.
  std::vector<double> std_x(cols, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    std_x[static_cast<std::size_t>(tab.basis()[r])] = tab.rhs(r);
  sol.x.assign(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = vmap[j];
    double v = std_x[static_cast<std::size_t>(vm.col)] * vm.sign + vm.shift;
    if (vm.neg_col >= 0) v -= std_x[static_cast<std::size_t>(vm.neg_col)];
    sol.x[static_cast<std::size_t>(j)] = v;
  }
  sol.objective = 0.0;
  for (int j = 0; j < n; ++j) sol.objective += problem.objective[j] * sol.x[j];

  double resid = 0.0;
  auto eval_row = [&](const SparseRow& r) {
    double acc = 0.0;
    for (const auto& [c, v] : r.entries) acc += v * sol.x[static_cast<std::size_t>(c)];
    return acc;
  };
  for (std::size_t i = 0; i < problem.eq_rows.size(); ++i) {
    const double scale = 1.0 + std::abs(problem.eq_rhs[i]);
    resid = std::max(resid, std::abs(eval_row(problem.eq_rows[i]) - problem.eq_rhs[i]) / scale);
  }
  for (std::size_t i = 0; i < problem.le_rows.size(); ++i) {
    const double scale = 1.0 + std::abs(problem.le_rhs[i]);
    resid = std::max(resid, std::max(0.0, eval_row(problem.le_rows[i]) - problem.le_rhs[i]) / scale);
  }
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(problem.lower[j]))
      resid = std::max(resid, (problem.lower[j] - sol.x[j]) / (1.0 + std::abs(problem.lower[j])));
    if (std::isfinite(problem.upper[j]))
      resid = std::max(resid, (sol.x[j] - problem.upper[j]) / (1.0 + std::abs(problem.upper[j])));
  }
  sol.max_residual = std::max(resid, 0.0);
  sol.status = LPStatus::Optimal;
  return sol;
}

namespace {

// Shared epigraph skeleton for the Step-3 builders. Candidate measures are
// parameterized by `n_weights` nonnegative weights summing to 1; `cell_of`
// maps (weight index, block) to the snake path position its mass lands on.
// Variables: [weights | per block (p_1..p_L, q_1..q_L) | t], where
// p_l - q_l tracks the cumulative difference sum_{i<=l} ((T mu)_i - nu_i).
template <typename CellOf>
LPProblem build_step3_epigraph(const MarginalBlockVector& nu_dp, const GridSpec& spec,
                               std::size_t n_weights, CellOf&& cell_of) {
  const std::uint64_t K = spec.num_subsets();
  const std::uint64_t L = spec.block_len();
  LPProblem p;
  p.n_vars = static_cast<int>(n_weights + 2 * K * L + 1);
  const auto pvar = [&](std::uint64_t j, std::uint64_t l) {
    return static_cast<int>(n_weights + j * 2 * L + l);
  };
  const auto qvar = [&](std::uint64_t j, std::uint64_t l) {
    return static_cast<int>(n_weights + j * 2 * L + L + l);
  };
  const int tvar = p.n_vars - 1;
  p.objective.assign(p.n_vars, 0.0);
  p.objective[tvar] = 1.0;
  p.lower.assign(p.n_vars, 0.0);
  p.upper.assign(p.n_vars, kInf);

  // Total mass one.
  {
    SparseRow row;
    row.entries.reserve(n_weights);
    for (std::size_t i = 0; i < n_weights; ++i) row.entries.emplace_back(static_cast<int>(i), 1.0);
    p.eq_rows.push_back(std::move(row));
    p.eq_rhs.push_back(1.0);
  }

  // Cumulative-difference recursions. Collect the weight->cell map once so
  // each weight contributes exactly one entry per block.
  std::vector<std::vector<int>> rows_entries;  // per (j, l): weight columns
  rows_entries.assign(K * L, {});
  for (std::size_t i = 0; i < n_weights; ++i)
    for (std::uint64_t j = 0; j < K; ++j)
      rows_entries[j * L + cell_of(i, j)].push_back(static_cast<int>(i));

  for (std::uint64_t j = 0; j < K; ++j) {
    const auto nu = nu_dp.block(j);
    for (std::uint64_t l = 0; l < L; ++l) {
      SparseRow row;
      row.entries.emplace_back(pvar(j, l), 1.0);
      row.entries.emplace_back(qvar(j, l), -1.0);
      if (l > 0) {
        row.entries.emplace_back(pvar(j, l - 1), -1.0);
        row.entries.emplace_back(qvar(j, l - 1), 1.0);
      }
      for (int wcol : rows_entries[j * L + l]) row.entries.emplace_back(wcol, -1.0);
      p.eq_rows.push_back(std::move(row));
      p.eq_rhs.push_back(-nu[l]);
    }
    SparseRow cap;
    cap.entries.reserve(2 * L + 1);
    const double invk = 1.0 / spec.k;
    for (std::uint64_t l = 0; l < L; ++l) {
      cap.entries.emplace_back(pvar(j, l), invk);
      cap.entries.emplace_back(qvar(j, l), invk);
    }
    cap.entries.emplace_back(tvar, -1.0);
    p.le_rows.push_back(std::move(cap));
    p.le_rhs.push_back(0.0);
  }
  return p;
}

GridHistogram weights_to_measure(const std::vector<double>& w,
                                 const std::vector<MultiIndex>& cells, int d, int k) {
  GridHistogram h;
  h.dims = d;
  h.k = k;
  double mass = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double v = w[i] < 1e-12 ? 0.0 : w[i];
    if (v > 0.0) {
      h.weights[cells[i]] += v;
      mass += v;
    }
  }
  if (mass <= 0.0) throw std::runtime_error("step3: solver returned a zero measure");
  for (auto& [idx, v] : h.weights) v /= mass;
  return h;
}

}  // namespace

LPProblem build_step3_exact(const MarginalBlockVector& nu_dp, const GridSpec& spec) {
  spec.validate();
  if (nu_dp.spec.d != spec.d || nu_dp.spec.s != spec.s || nu_dp.spec.k != spec.k)
    throw std::invalid_argument("build_step3_exact: spec mismatch");
  const std::uint64_t n_cells = checked_grid_size(spec.k, spec.d);
  const auto subsets = enumerate_subsets(spec.d, spec.s);
  const SnakeOrder full(spec.k, spec.d);
  const SnakeOrder marg(spec.k, spec.s);
  // Path position of every full cell within every block.
  std::vector<std::uint64_t> pos(n_cells * subsets.size());
  MultiIndex sub(spec.s);
  for (std::uint64_t z = 0; z < n_cells; ++z) {
    const MultiIndex idx = full.index_at(z);
    for (std::size_t j = 0; j < subsets.size(); ++j) {
      for (int i = 0; i < spec.s; ++i) sub[i] = idx[subsets[j][i]];
      pos[z * subsets.size() + j] = marg.position_of(sub);
    }
  }
  return build_step3_epigraph(nu_dp, spec, n_cells, [&](std::size_t z, std::uint64_t j) {
    return pos[z * subsets.size() + j];
  });
}

LPProblem build_step3_public(const MarginalBlockVector& nu_dp,
                             const std::vector<std::vector<double>>& public_points,
                             const GridSpec& spec) {
  spec.validate();
  if (public_points.empty())
    throw std::invalid_argument("build_step3_public: empty public set");
  if (nu_dp.spec.d != spec.d || nu_dp.spec.s != spec.s || nu_dp.spec.k != spec.k)
    throw std::invalid_argument("build_step3_public: spec mismatch");
  const auto subsets = enumerate_subsets(spec.d, spec.s);
  const SnakeOrder marg(spec.k, spec.s);
  std::vector<std::uint64_t> pos(public_points.size() * subsets.size());
  MultiIndex sub(spec.s);
  for (std::size_t i = 0; i < public_points.size(); ++i) {
    if (static_cast<int>(public_points[i].size()) != spec.d)
      throw std::invalid_argument("build_step3_public: public point dimension mismatch");
    const MultiIndex idx = discretize_point(public_points[i], spec.k);
    for (std::size_t j = 0; j < subsets.size(); ++j) {
      for (int t = 0; t < spec.s; ++t) sub[t] = idx[subsets[j][t]];
      pos[i * subsets.size() + j] = marg.position_of(sub);
    }
  }
  return build_step3_epigraph(nu_dp, spec, public_points.size(),
                              [&](std::size_t i, std::uint64_t j) {
                                return pos[i * subsets.size() + j];
                              });
}

GridHistogram step3_exact_measure(const LPSolution& sol, const GridSpec& spec) {
  if (sol.status != LPStatus::Optimal)
    throw std::runtime_error("step3: solver did not reach optimality");
  const std::uint64_t n_cells = checked_grid_size(spec.k, spec.d);
  const SnakeOrder full(spec.k, spec.d);
  std::vector<MultiIndex> cells(n_cells);
  for (std::uint64_t z = 0; z < n_cells; ++z) cells[z] = full.index_at(z);
  return weights_to_measure(sol.x, cells, spec.d, spec.k);
}

GridHistogram step3_public_measure(const LPSolution& sol,
                                   const std::vector<std::vector<double>>& public_points,
                                   const GridSpec& spec) {
  if (sol.status != LPStatus::Optimal)
    throw std::runtime_error("step3: solver did not reach optimality");
  std::vector<MultiIndex> cells(public_points.size());
  for (std::size_t i = 0; i < public_points.size(); ++i)
    cells[i] = discretize_point(public_points[i], spec.k);
  return weights_to_measure(sol.x, cells, spec.d, spec.k);
}

}  // namespace dpsynth
