#include "dpsynth/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpsynth/errors.hpp"
#include "dpsynth/lp.hpp"

namespace dpsynth {

namespace {

void check_specs(const MarginalBlockVector& v, const MarginalBlockVector& u,
                 const GridSpec& spec) {
  auto same = [&](const GridSpec& a) { return a.d == spec.d && a.s == spec.s && a.k == spec.k; };
  if (!same(v.spec) || !same(u.spec))
    throw std::invalid_argument("proxy loss: spec mismatch");
  if (v.data.size() != u.data.size())
    throw std::invalid_argument("proxy loss: length mismatch");
}

// Flat-metric value of one signed block: max f.delta over |f|<=1 and
// |f_i - f_j| <= 1/k on king-move neighbor pairs. Composing edge constraints
// along Chebyshev geodesics yields the full l-infinity Lipschitz set.
double flat_metric_block(const std::vector<double>& delta, int k, int s) {
  bool all_zero = true;
  for (double d : delta)
    if (d != 0.0) {
      all_zero = false;
      break;
    }
  if (all_zero) return 0.0;

  const SnakeOrder order(k, s);
  const std::uint64_t n = order.size();
  if (n > guards::kMaxFlatMetricBlock)
    throw CapacityError("proxy_ut: block exceeds the LP size guard");

  LPProblem p;
  p.n_vars = static_cast<int>(n);
  p.objective.assign(n, 0.0);
  for (std::uint64_t i = 0; i < n; ++i) p.objective[i] = -delta[i];  // maximize delta.f
  p.lower.assign(n, -1.0);
  p.upper.assign(n, 1.0);

  // Forward (lexicographically positive) offsets in {-1,0,1}^s.
  std::vector<std::vector<int>> offsets;
  std::vector<int> off(s, -1);
  while (true) {
    bool positive = false;
    for (int a = s - 1; a >= 0; --a) {
      if (off[a] > 0) {
        positive = true;
        break;
      }
      if (off[a] < 0) break;
    }
    if (positive) offsets.push_back(off);
    int a = 0;
    while (a < s && off[a] == 1) off[a++] = -1;
    if (a == s) break;
    ++off[a];
  }

  const double step = 1.0 / k;
  MultiIndex nb(s);
  for (std::uint64_t i = 0; i < n; ++i) {
    const MultiIndex idx = order.index_at(i);
    for (const auto& o : offsets) {
      bool ok = true;
      for (int a = 0; a < s; ++a) {
        const long long t = static_cast<long long>(idx[a]) + o[a];
        if (t < 0 || t >= k) {
          ok = false;
          break;
        }
        nb[a] = static_cast<std::uint32_t>(t);
      }
      if (!ok) continue;
      const int ci = static_cast<int>(i);
      const int cj = static_cast<int>(order.position_of(nb));
      SparseRow r1, r2;
      r1.entries = {{ci, 1.0}, {cj, -1.0}};
      r2.entries = {{ci, -1.0}, {cj, 1.0}};
      p.le_rows.push_back(std::move(r1));
      p.le_rhs.push_back(step);
      p.le_rows.push_back(std::move(r2));
      p.le_rhs.push_back(step);
    }
  }

  const LPSolution sol = lp_solve(p);
  if (sol.status != LPStatus::Optimal)
    throw std::runtime_error("proxy_ut: flat-metric LP did not converge");
  return -sol.objective;
}

}  // namespace

double proxy_lt(const MarginalBlockVector& v, const MarginalBlockVector& u,
                const GridSpec& spec) {
  check_specs(v, u, spec);
  const std::uint64_t K = spec.num_subsets();
  const std::uint64_t L = spec.block_len();
  double worst = 0.0;
  for (std::uint64_t j = 0; j < K; ++j) {
    const auto vb = v.block(j);
    const auto ub = u.block(j);
    double cum = 0.0, acc = 0.0;
    for (std::uint64_t l = 0; l < L; ++l) {
      cum += vb[l] - ub[l];
      acc += std::abs(cum);
    }
    worst = std::max(worst, acc / spec.k);
  }
  return worst;
}

double proxy_ut(const MarginalBlockVector& v, const MarginalBlockVector& u,
                const GridSpec& spec) {
  check_specs(v, u, spec);
  const std::uint64_t K = spec.num_subsets();
  const std::uint64_t L = spec.block_len();
  double worst = 0.0;
  std::vector<double> delta(L);
  for (std::uint64_t j = 0; j < K; ++j) {
    const auto vb = v.block(j);
    const auto ub = u.block(j);
    for (std::uint64_t l = 0; l < L; ++l) delta[l] = vb[l] - ub[l];
    worst = std::max(worst, flat_metric_block(delta, spec.k, spec.s));
  }
  return worst;
}

double proxy_loss(ProxyLossKind kind, const MarginalBlockVector& v,
                  const MarginalBlockVector& u, const GridSpec& spec) {
  return kind == ProxyLossKind::LT ? proxy_lt(v, u, spec) : proxy_ut(v, u, spec);
}

double w1_1d(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty())
    throw std::invalid_argument("w1_1d: length mismatch");
  double mp = 0.0, mq = 0.0;
  for (double x : p) mp += x;
  for (double x : q) mq += x;
  if (std::abs(mp - mq) > 1e-9) throw std::invalid_argument("w1_1d: mass mismatch");
  double cum = 0.0, acc = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    cum += p[l] - q[l];
    acc += std::abs(cum);
  }
  return acc / static_cast<double>(p.size());
}

double w1_exact(const GridHistogram& a, const GridHistogram& b) {
  if (a.dims != b.dims || a.k != b.k)
    throw std::invalid_argument("w1_exact: measures on different grids");
  std::vector<std::pair<MultiIndex, double>> sa, sb;
  for (const auto& [idx, w] : a.weights)
    if (w > 0.0) sa.emplace_back(idx, w);
  for (const auto& [idx, w] : b.weights)
    if (w > 0.0) sb.emplace_back(idx, w);
  double ma = 0.0, mb = 0.0;
  for (const auto& [idx, w] : sa) ma += w;
  for (const auto& [idx, w] : sb) mb += w;
  if (std::abs(ma - mb) > 1e-9) throw std::invalid_argument("w1_exact: mass mismatch");
  if (sa.empty() && sb.empty()) return 0.0;
  if (sa.empty() || sb.empty())
    throw std::invalid_argument("w1_exact: one-sided empty support");
  if (sa.size() > guards::kMaxTransportSupport || sb.size() > guards::kMaxTransportSupport)
    throw CapacityError("w1_exact: support exceeds the size guard");

  const std::size_t na = sa.size(), nb = sb.size();
  LPProblem p;
  p.n_vars = static_cast<int>(na * nb);
  p.objective.assign(na * nb, 0.0);
  p.lower.assign(na * nb, 0.0);
  p.upper.assign(na * nb, kInf);
  const double invk = 1.0 / a.k;
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      std::uint32_t cheb = 0;
      for (std::size_t t = 0; t < sa[i].first.size(); ++t) {
        const std::uint32_t hi = std::max(sa[i].first[t], sb[j].first[t]);
        const std::uint32_t lo = std::min(sa[i].first[t], sb[j].first[t]);
        cheb = std::max(cheb, hi - lo);
      }
      p.objective[i * nb + j] = cheb * invk;
    }
  // Row sums match a, column sums match b (rescaled to a's mass so the
  // system stays consistent under float mass mismatch below 1e-9).
  const double fix = ma / mb;
  for (std::size_t i = 0; i < na; ++i) {
    SparseRow r;
    for (std::size_t j = 0; j < nb; ++j) r.entries.emplace_back(static_cast<int>(i * nb + j), 1.0);
    p.eq_rows.push_back(std::move(r));
    p.eq_rhs.push_back(sa[i].second);
  }
  for (std::size_t j = 0; j < nb; ++j) {
    SparseRow r;
    for (std::size_t i = 0; i < na; ++i) r.entries.emplace_back(static_cast<int>(i * nb + j), 1.0);
    p.eq_rows.push_back(std::move(r));
    p.eq_rhs.push_back(sb[j].second * fix);
  }
  const LPSolution sol = lp_solve(p);
  if (sol.status != LPStatus::Optimal)
    throw std::runtime_error("w1_exact: transport LP did not converge");
  return sol.objective;
}

namespace {

// Max over subsets of the mass-weighted average displacement
// sum w * max_{j in S} |x_j - center_j|.
template <typename Items>
std::vector<double> subset_residuals(const Items& items,
                                     const std::vector<std::vector<int>>& subsets, int k_eval) {
  std::vector<double> res(subsets.size(), 0.0);
  for (const auto& [x, w] : items) {
    const MultiIndex ni = discretize_point(x, k_eval);
    for (std::size_t si = 0; si < subsets.size(); ++si) {
      double disp = 0.0;
      for (int coord : subsets[si]) {
        const double c = (2.0 * ni[static_cast<std::size_t>(coord)] + 1.0) / (2.0 * k_eval);
        disp = std::max(disp, std::abs(x[static_cast<std::size_t>(coord)] - c));
      }
      res[si] += w * disp;
    }
  }
  return res;
}

EvalBracket bracket_from(const GridHistogram& pa, const GridHistogram& pb,
                         const std::vector<double>& res_a, const std::vector<double>& res_b,
                         const std::vector<std::vector<int>>& subsets) {
  EvalBracket out;
  for (std::size_t si = 0; si < subsets.size(); ++si) {
    const GridHistogram ma = marginal_project(pa, subsets[si]);
    const GridHistogram mb = marginal_project(pb, subsets[si]);
    out.core = std::max(out.core, w1_exact(ma, mb));
    out.residual_a = std::max(out.residual_a, res_a[si]);
    out.residual_b = std::max(out.residual_b, res_b[si]);
  }
  out.ub = out.core + out.residual_a + out.residual_b;
  out.lb = std::max(out.core - out.residual_a - out.residual_b, 0.0);
  return out;
}

}  // namespace

EvalBracket utility_loss_bounds(const GridHistogram& a, const GridHistogram& b, int s,
                                int k_eval) {
  if (a.dims != b.dims) throw std::invalid_argument("utility_loss_bounds: dimension mismatch");
  if (s < 1 || s > a.dims) throw std::invalid_argument("utility_loss_bounds: bad s");
  checked_grid_size(k_eval, s);
  const auto subsets = enumerate_subsets(a.dims, s);

  auto rediscretize = [&](const GridHistogram& h) {
    GridHistogram out;
    out.dims = h.dims;
    out.k = k_eval;
    std::vector<std::pair<std::vector<double>, double>> items;
    items.reserve(h.weights.size());
    for (const auto& [idx, w] : h.weights) {
      if (w < -1e-12) throw std::invalid_argument("utility_loss_bounds: signed measure");
      items.emplace_back(h.center(idx), w);
      out.weights[discretize_point(items.back().first, k_eval)] += w;
    }
    return std::make_pair(out, subset_residuals(items, subsets, k_eval));
  };
  const auto [pa, ra] = rediscretize(a);
  const auto [pb, rb] = rediscretize(b);
  return bracket_from(pa, pb, ra, rb, subsets);
}

EvalBracket utility_loss_bounds(const Dataset& a, const Dataset& b, int s, int k_eval) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim()) throw std::invalid_argument("utility_loss_bounds: dimension mismatch");
  if (s < 1 || s > a.dim()) throw std::invalid_argument("utility_loss_bounds: bad s");
  checked_grid_size(k_eval, s);
  const auto subsets = enumerate_subsets(a.dim(), s);

  auto discretize = [&](const Dataset& d) {
    GridSpec spec{d.dim(), s, k_eval};
    GridHistogram h = empirical_measure(d, spec);
    std::vector<std::pair<std::vector<double>, double>> items;
    items.reserve(d.n());
    const double w = 1.0 / static_cast<double>(d.n());
    for (const auto& p : d.points) items.emplace_back(p, w);
    return std::make_pair(h, subset_residuals(items, subsets, k_eval));
  };
  const auto [pa, ra] = discretize(a);
  const auto [pb, rb] = discretize(b);
  return bracket_from(pa, pb, ra, rb, subsets);
}

}  // namespace dpsynth
