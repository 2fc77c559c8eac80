#pragma once

#include <limits>
#include <vector>

#include "dpsynth/query.hpp"

namespace dpsynth {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One sparse constraint row, entries as (column, coefficient).
struct SparseRow {
  std::vector<std::pair<int, double>> entries;
};

// min c.x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  lower <= x <= upper.
struct LPProblem {
  int n_vars = 0;
  std::vector<double> objective;
  std::vector<SparseRow> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<SparseRow> le_rows;
  std::vector<double> le_rhs;
  std::vector<double> lower;  // -inf allowed
  std::vector<double> upper;  // +inf allowed

  std::size_t nonzero_count() const;
  void validate() const;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPSolution {
  LPStatus status = LPStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  // max over rows of the scaled primal feasibility violation
  double max_residual = 0.0;
};

// Two-phase dense primal simplex. Dantzig pricing with lowest-index
// tie-breaking, switching to Bland's rule after a degenerate stall so the
// solve always terminates. Deterministic.
LPSolution lp_solve(const LPProblem& problem);

// Step-3 epigraph LP over all probability measures on the full k^d grid:
// min over mu of the partial-sum proxy loss against nu_dp. Variables are the
// joint grid weights in snake order, followed by per-block positive/negative
// cumulative parts and the epigraph scalar.
LPProblem build_step3_exact(const MarginalBlockVector& nu_dp, const GridSpec& spec);

// Same objective restricted to mixtures of the (discretized) public points.
LPProblem build_step3_public(const MarginalBlockVector& nu_dp,
                             const std::vector<std::vector<double>>& public_points,
                             const GridSpec& spec);

// Extract the released measure from a solved Step-3 problem: weights below
// 1e-12 clamp to 0 and the result is renormalized to mass 1.
GridHistogram step3_exact_measure(const LPSolution& sol, const GridSpec& spec);
GridHistogram step3_public_measure(const LPSolution& sol,
                                   const std::vector<std::vector<double>>& public_points,
                                   const GridSpec& spec);

}  // namespace dpsynth
