#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpsynth/lp.hpp"
#include "dpsynth/mechanism.hpp"

namespace dpsynth {

enum class Step3Mode { Exact, Public };

// High-probability upper bound on the utility loss, decomposed into the
// three computable terms. All terms depend only on DP quantities.
struct Certificate {
  double discretization_error = 0.0;   // 1 / 2k
  double privatization_quantile = 0.0; // q_{1-delta}(P(0, eta)), Monte Carlo
  double projection_error = 0.0;       // P(nu_dp, T mu); 0 extra for grid support
  double total = 0.0;
  ProxyLossKind loss_kind = ProxyLossKind::UT;
  double delta_fail = 0.1;
  int mc_samples = 200;
  // configuration echo
  int k = 0, s = 0, d = 0;
  double epsilon = 0.0;
  double delta_dp = 0.0;
  std::uint64_t seed = 0;
};

struct ReleaseBundle {
  GridHistogram measure;
  Certificate certificate;
  MarginalBlockVector nu_dp;

  ReleaseBundle(GridHistogram m, Certificate c, MarginalBlockVector nu)
      : measure(std::move(m)), certificate(c), nu_dp(std::move(nu)) {}
};

struct ReleaseRequest {
  GridSpec spec;
  PrivacyBudget budget;
  Step3Mode mode = Step3Mode::Exact;
  std::vector<std::vector<double>> public_points;  // public mode only
  double delta_fail = 0.1;
  int mc_samples = 200;
  std::uint64_t seed = 0;

  // Parameter checks shared by the CLI and the pipeline; does not build the
  // LP, so it accepts any configuration the vector-length guards allow.
  void validate(std::size_t n) const;
};

// The full release pipeline: project, privatize, optimize, certify. Only
// nu_dp and public inputs feed Steps 3-4, so the bundle is a deterministic
// post-processing of a DP vector. Stream 0 of the seed drives the release
// noise, stream 1 the certificate Monte Carlo.
ReleaseBundle run_algorithm1(const Dataset& dataset, const ReleaseRequest& request);

// Steps 3-4 alone, from an already privatized vector. run_algorithm1 calls
// this; calling it directly on a serialized nu_dp reproduces the bundle.
ReleaseBundle complete_release(const MarginalBlockVector& nu_dp, const ReleaseRequest& request,
                               std::size_t n);

// Assemble the certificate for a grid- or public-supported measure.
Certificate certify(const GridHistogram& mu, const MarginalBlockVector& nu_dp,
                    const GridSpec& spec, double quantile, ProxyLossKind loss_kind);

// n_out i.i.d. grid-center draws from a probability measure.
Dataset sample_synthetic(const GridHistogram& measure, std::size_t n_out, CounterRng& rng);

// Flat JSON documents (stable field names, round-trip precision).
std::string certificate_to_json(const Certificate& cert);
std::string nu_dp_to_json(const MarginalBlockVector& nu_dp, std::size_t n,
                          const ReleaseRequest& request);
struct NuDpSnapshot {
  MarginalBlockVector nu_dp;
  std::size_t n = 0;
  ReleaseRequest request;
};
NuDpSnapshot nu_dp_from_json(const std::string& text);
std::string measure_to_json(const GridHistogram& h);
GridHistogram measure_from_json(const std::string& text);
Certificate certificate_from_json(const std::string& text);

}  // namespace dpsynth
