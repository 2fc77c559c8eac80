#include "dpsynth/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "dpsynth/haar.hpp"

namespace dpsynth {

void PrivacyBudget::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("PrivacyBudget: epsilon must be positive");
  if (!(delta_dp >= 0.0 && delta_dp < 1.0))
    throw std::invalid_argument("PrivacyBudget: need 0 <= delta_dp < 1");
}

NoiseSpec NoiseSpec::from(const PrivacyBudget& budget, const GridSpec& spec, std::size_t n) {
  budget.validate();
  NoiseSpec ns;
  ns.lambda = std::isinf(budget.epsilon) ? 0.0 : sensitivity(spec, n) / budget.epsilon;
  if (budget.delta_dp > 0.0 && ns.lambda > 0.0)
    ns.truncation = tlap_truncation_radius(ns.lambda, budget.epsilon, budget.delta_dp);
  return ns;
}

namespace {

// Shared inverse CDF: u on (-1/2, 1/2) maps to -lambda sign(u) ln(1 - 2|u|).
double laplace_from_centered_uniform(double lambda, double u) {
  const double sign = u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
  return -lambda * sign * std::log1p(-2.0 * std::abs(u));
}

double centered_uniform(CounterRng& rng) {
  while (true) {
    const double u = rng.next_double() - 0.5;
    if (1.0 - 2.0 * std::abs(u) > 0.0) return u;  // rejects the single point u = -1/2
  }
}

}  // namespace

double sample_laplace(double lambda, CounterRng& rng) {
  if (!(lambda > 0.0)) throw std::invalid_argument("sample_laplace: lambda must be positive");
  return laplace_from_centered_uniform(lambda, centered_uniform(rng));
}

double tlap_truncation_radius(double lambda, double epsilon, double delta) {
  if (!(lambda > 0.0) || !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("tlap: need lambda > 0, epsilon > 0, 0 < delta < 1");
  return lambda * (1.0 + std::expm1(epsilon) / (2.0 * delta));
}

double sample_tlap(double lambda, double epsilon, double delta, CounterRng& rng) {
  const double A = tlap_truncation_radius(lambda, epsilon, delta);
  // Tail mass cut at each side: p = F(-A) = exp(-A/lambda) / 2.
  const double p = 0.5 * std::exp(-A / lambda);
  const double u = rng.next_double();
  const double w = (u - 0.5) * (1.0 - 2.0 * p);  // uniform on +-(1/2 - p)
  return laplace_from_centered_uniform(lambda, w);
}

MarginalBlockVector privatize(const MarginalBlockVector& v, const PrivacyBudget& budget,
                              const GridSpec& spec, std::size_t n, const CounterRng& rng) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("privatize: n must be positive");
  if (v.spec.d != spec.d || v.spec.s != spec.s || v.spec.k != spec.k)
    throw std::invalid_argument("privatize: spec mismatch");
  MarginalBlockVector out = v;
  const NoiseSpec ns = NoiseSpec::from(budget, spec, n);
  if (ns.lambda == 0.0) return out;  // epsilon -> infinity limit

  const std::uint64_t L = spec.block_len();
  const HaarOperator phi = build_phi(L);
  const std::uint64_t m_phi = phi.order();
  std::vector<double> eta(m_phi);
  for (std::uint64_t j = 0; j < spec.num_subsets(); ++j) {
    CounterRng blk = rng.derive(j);
    for (std::uint64_t i = 0; i < m_phi; ++i)
      eta[i] = budget.delta_dp > 0.0
                   ? sample_tlap(ns.lambda, budget.epsilon, budget.delta_dp, blk)
                   : sample_laplace(ns.lambda, blk);
    const std::vector<double> corr = phi_apply(phi, eta);
    auto block = out.block(j);
    for (std::uint64_t l = 0; l < L; ++l) block[l] += corr[l];
  }
  return out;
}

MarginalBlockVector sample_noise_vector(const PrivacyBudget& budget, const GridSpec& spec,
                                        std::size_t n, const CounterRng& rng) {
  MarginalBlockVector zero(spec);
  return privatize(zero, budget, spec, n, rng);
}

double noise_quantile_mc(const GridSpec& spec, const PrivacyBudget& budget, std::size_t n,
                         ProxyLossKind loss_kind, double delta_fail, int n_mc,
                         const CounterRng& rng) {
  if (n_mc < 1) throw std::invalid_argument("noise_quantile_mc: n_mc must be positive");
  if (!(delta_fail > 0.0 && delta_fail < 1.0))
    throw std::invalid_argument("noise_quantile_mc: delta_fail must lie in (0,1)");
  if (static_cast<double>(n_mc) * delta_fail < 5.0)
    std::cerr << "warning: noise_quantile_mc has fewer than 5 expected tail samples; "
                 "the quantile estimate is coarse\n";
  const MarginalBlockVector zero(spec);
  std::vector<double> values(static_cast<std::size_t>(n_mc));
  for (int t = 0; t < n_mc; ++t) {
    const MarginalBlockVector eta = sample_noise_vector(budget, spec, n, rng.derive(t));
    values[static_cast<std::size_t>(t)] = proxy_loss(loss_kind, zero, eta, spec);
  }
  std::sort(values.begin(), values.end());
  // Conservative upper order statistic, rank ceil((1 - delta) n_mc).
  auto rank = static_cast<std::size_t>(
      std::ceil((1.0 - delta_fail) * static_cast<double>(n_mc)));
  rank = std::min(std::max<std::size_t>(rank, 1), values.size());
  return values[rank - 1];
}

}  // namespace dpsynth
