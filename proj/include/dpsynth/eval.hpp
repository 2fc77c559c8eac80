#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpsynth/grid.hpp"
#include "dpsynth/rng.hpp"

namespace dpsynth {

enum class GeneratorKind { Uniform, Clustered, Segment };

struct GeneratorParams {
  GeneratorKind kind = GeneratorKind::Uniform;
  int centers = 3;       // clustered: number of mixture components
  double spread = 0.05;  // clustered: half-width of the component box
};

Dataset generate_data(const GeneratorParams& params, std::size_t n, int d, CounterRng& rng);

enum class KRule { Fixed, TheoremOptimal };

struct SweepConfig {
  std::vector<std::size_t> n_values;  // strictly increasing
  int d = 2;
  int s = 1;
  KRule k_rule = KRule::TheoremOptimal;
  int fixed_k = 4;
  double epsilon = 1.0;
  int trials = 10;
  std::uint64_t base_seed = 0;
  GeneratorParams generator;

  void validate() const;
};

struct SweepRow {
  std::size_t n = 0;
  int k = 0;
  double mean_loss = 0.0;
  double std_loss = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

// k from the theorem rule, max(2, round(d^{-1} (log(eps n)^2 / (n eps))^{-1/s})).
int theorem_optimal_k(std::size_t n, int d, int s, double epsilon);

// For each n: `trials` exact-mode releases on a grid-snapped dataset with
// derived seeds; the per-trial loss is the (exact, residual-free) utility
// bracket between input measure and release. Trials run in parallel up to
// the DP_SANITIZE_THREADS cap; aggregation order is fixed, so output is
// byte-reproducible.
std::vector<SweepRow> rate_sweep(const SweepConfig& config);

// Least-squares slope of log(mean_loss) against log(n) over positive rows.
double slope_fit(const std::vector<SweepRow>& rows);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace dpsynth
