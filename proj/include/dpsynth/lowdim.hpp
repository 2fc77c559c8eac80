#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpsynth/grid.hpp"
#include "dpsynth/rng.hpp"

namespace dpsynth {

// Euclidean projection onto the l1 ball by sort-and-threshold; exact minimizer.
std::vector<double> project_l1_ball(const std::vector<double>& x, double radius);

struct LowdimResult {
  GridHistogram measure;
  // Diagnostics of the sparse recovery step (all DP post-processing).
  double nu_error_l1 = 0.0;  // ||nu_dp - v||_1 against the private histogram
  double eta_inf = 0.0;      // ||eta||_inf of the drawn noise
  std::uint64_t support = 0; // |q_{1/2k}(D)| of the input
};

// Full-dimensional release: standard Laplace mechanism on the k^d histogram
// (no Haar correlation), l1-ball projection, then the flat-metric fitting LP
// on small instances with a clip-and-renormalize fallback above the guard.
LowdimResult lowdim_release(const Dataset& dataset, int k, double epsilon,
                            const CounterRng& rng);

struct AdaptiveRow {
  int s_prime = 0;
  int k = 1;
  double support_estimate = 0.0;
  double score = 0.0;
};

struct AdaptiveReport {
  std::vector<AdaptiveRow> rows;
  int s_opt = 0;
  double eps_tilde = 0.0;  // per-query budget epsilon / (2 (d + 1))
  double epsilon = 0.0;
  double c = 1.0;          // echoed rate-check constant; unused by the algorithm
  std::uint64_t n = 0;
  GridHistogram measure;   // the release at s_opt
};

// Adaptive selection over the effective dimension s' in {0,...,d}: one
// lowdim release plus one DP support estimate per s', all at budget
// eps_tilde, then the argmin of the plug-in score (ties toward smaller s').
AdaptiveReport adaptive_select(const Dataset& dataset, int d, double epsilon, double c,
                               const CounterRng& rng);

std::string adaptive_report_to_json(const AdaptiveReport& report);
AdaptiveReport adaptive_report_from_json(const std::string& text);

// The plug-in score, 1/(2k) + 64 log(k^d + 1) / (n epsilon) * support_estimate.
double adaptive_score(int k, int d, std::uint64_t n, double epsilon, double support_estimate);

}  // namespace dpsynth
