#pragma once

#include <optional>

#include "dpsynth/loss.hpp"
#include "dpsynth/query.hpp"
#include "dpsynth/rng.hpp"

namespace dpsynth {

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta_dp = 0.0;  // 0 selects pure eps-DP (Laplace), >0 truncated Laplace

  void validate() const;
};

// Noise calibration for one release: lambda = ||Phi^{-1}||_1 Delta_T / eps
// (= Delta_T / eps for the Haar operator), and the truncation radius when
// running under (eps, delta)-DP.
struct NoiseSpec {
  double lambda = 0.0;
  std::optional<double> truncation;  // A = lambda (1 + (e^eps - 1) / (2 delta))

  static NoiseSpec from(const PrivacyBudget& budget, const GridSpec& spec, std::size_t n);
};

// One Laplace(lambda) draw by inverse CDF; deterministic given the rng state.
double sample_laplace(double lambda, CounterRng& rng);

// Laplace(lambda) renormalized to [-A, A], A = lambda (1 + (e^eps - 1)/(2 delta)).
double sample_tlap(double lambda, double epsilon, double delta, CounterRng& rng);

double tlap_truncation_radius(double lambda, double epsilon, double delta);

// Per-block correlated privatization: nu^{S_j} = v^{S_j} + [Phi eta^{S_j}]_{1:k^s}
// with eta i.i.d. Laplace (or truncated Laplace) of scale 2 C(d,s) / (n eps).
// Block j consumes the derived stream rng.derive(j). An infinite epsilon
// short-circuits to zero noise.
MarginalBlockVector privatize(const MarginalBlockVector& v, const PrivacyBudget& budget,
                              const GridSpec& spec, std::size_t n, const CounterRng& rng);

// The pure noise component [Phi eta]_{1:k^s} per block (privatize of zero).
MarginalBlockVector sample_noise_vector(const PrivacyBudget& budget, const GridSpec& spec,
                                        std::size_t n, const CounterRng& rng);

// Monte-Carlo (1 - delta_fail)-quantile of P(0, eta): n_mc independent noise
// vectors drawn exactly as privatize draws them (trial t uses rng.derive(t)),
// upper order statistic at rank ceil((1 - delta_fail) n_mc).
double noise_quantile_mc(const GridSpec& spec, const PrivacyBudget& budget, std::size_t n,
                         ProxyLossKind loss_kind, double delta_fail, int n_mc,
                         const CounterRng& rng);

}  // namespace dpsynth
