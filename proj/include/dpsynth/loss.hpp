#pragma once

#include <vector>

#include "dpsynth/query.hpp"

namespace dpsynth {

// Which translation-invariant proxy bounds the marginal transport loss:
// LT is the partial-sum form along the snake path (optimized in Step 3),
// UT the flat-metric LP form (the tighter certificate).
enum class ProxyLossKind { LT, UT };

// max over blocks of (1/k) sum_l |sum_{i<=l} (v - u)_i|.
double proxy_lt(const MarginalBlockVector& v, const MarginalBlockVector& u,
                const GridSpec& spec);

// max over blocks of sup{ sum f(z_i) (v - u)_i : |f| <= 1, f 1-Lipschitz in
// l-infinity }, each block solved as an LP over king-move edge constraints.
double proxy_ut(const MarginalBlockVector& v, const MarginalBlockVector& u,
                const GridSpec& spec);

double proxy_loss(ProxyLossKind kind, const MarginalBlockVector& v,
                  const MarginalBlockVector& u, const GridSpec& spec);

// Vallender identity on the uniform 1D grid with k = p.size() cells:
// (1/k) sum_l |F_p(l) - F_q(l)|.
double w1_1d(const std::vector<double>& p, const std::vector<double>& q);

// Exact transport cost between two grid histograms under the l-infinity
// ground metric, via the coupling LP. Independent oracle route; the proxies
// above never call it.
double w1_exact(const GridHistogram& a, const GridHistogram& b);

struct EvalBracket {
  double core = 0.0;  // max over subsets of the projected-marginal W1
  double residual_a = 0.0;
  double residual_b = 0.0;
  double lb = 0.0;
  double ub = 0.0;
};

// Triangle-inequality bracket of the true utility loss between two measures,
// both re-discretized onto the k_eval grid. Histogram inputs measure the
// displacement of their supported centers; dataset inputs measure raw-point
// displacement.
EvalBracket utility_loss_bounds(const GridHistogram& a, const GridHistogram& b,
                                int s, int k_eval);
EvalBracket utility_loss_bounds(const Dataset& a, const Dataset& b, int s, int k_eval);

}  // namespace dpsynth
