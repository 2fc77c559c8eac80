#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "dpsynth/loss.hpp"
#include "dpsynth/sanitize.hpp"

using namespace dpsynth;

namespace {

Dataset grid_supported_dataset(int n, int d, int k, std::uint64_t seed) {
  CounterRng rng(seed);
  Dataset out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> p(d);
    for (int j = 0; j < d; ++j) {
      const auto cell = rng.next_below(static_cast<std::uint64_t>(k));
      p[j] = (2.0 * static_cast<double>(cell) + 1.0) / (2.0 * k);
    }
    out.points.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("noiseless exact release is a fixed point") {
  const Dataset data = grid_supported_dataset(60, 2, 4, 5);
  ReleaseRequest req;
  req.spec = GridSpec{2, 1, 4};
  req.budget = PrivacyBudget{std::numeric_limits<double>::infinity(), 0.0};
  req.mc_samples = 20;
  req.seed = 9;
  const ReleaseBundle bundle = run_algorithm1(data, req);
  const auto v = apply_T(empirical_measure(data, req.spec), req.spec);
  const auto tmu = apply_T(bundle.measure, req.spec);
  for (std::size_t i = 0; i < v.data.size(); ++i)
    CHECK(tmu.data[i] == doctest::Approx(v.data[i]).epsilon(1e-9));
  CHECK(bundle.certificate.privatization_quantile == 0.0);
  CHECK(bundle.certificate.projection_error <= 1e-9);
  CHECK(bundle.certificate.total ==
        doctest::Approx(1.0 / 8.0 + bundle.certificate.projection_error).epsilon(1e-12));
}

TEST_CASE("certificate total always includes the discretization floor") {
  const Dataset data = grid_supported_dataset(40, 2, 4, 11);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    ReleaseRequest req;
    req.spec = GridSpec{2, 1, 4};
    req.budget = PrivacyBudget{1.0, 0.0};
    req.mc_samples = 30;
    req.seed = seed;
    const ReleaseBundle bundle = run_algorithm1(data, req);
    CHECK(bundle.certificate.total >= 1.0 / 8.0);
    CHECK(bundle.certificate.total ==
          doctest::Approx(bundle.certificate.discretization_error +
                          bundle.certificate.privatization_quantile +
                          bundle.certificate.projection_error)
              .epsilon(1e-12));
    CHECK(bundle.certificate.discretization_error >= 0);
    CHECK(bundle.certificate.privatization_quantile >= 0);
    CHECK(bundle.certificate.projection_error >= 0);
  }
}

TEST_CASE("the paper operating point passes validation") {
  ReleaseRequest req;
  req.spec = GridSpec{5, 2, 25};
  req.budget = PrivacyBudget{1.0, 0.0};
  req.mode = Step3Mode::Public;
  req.delta_fail = 0.1;
  req.mc_samples = 200;
  CounterRng rng(77);
  for (int i = 0; i < 4000; ++i) {
    std::vector<double> z(5);
    for (auto& x : z) x = rng.next_double();
    req.public_points.push_back(z);
  }
  CHECK_NOTHROW(req.validate(195665));
}

TEST_CASE("steps 3-4 reproduce bitwise from a serialized nu_dp") {
  const Dataset data = grid_supported_dataset(50, 2, 4, 21);
  ReleaseRequest req;
  req.spec = GridSpec{2, 1, 4};
  req.budget = PrivacyBudget{1.0, 0.0};
  req.mc_samples = 25;
  req.seed = 31;
  const ReleaseBundle bundle = run_algorithm1(data, req);

  const std::string doc = nu_dp_to_json(bundle.nu_dp, data.n(), req);
  const NuDpSnapshot snap = nu_dp_from_json(doc);
  CHECK(snap.nu_dp.data == bundle.nu_dp.data);
  const ReleaseBundle redo = complete_release(snap.nu_dp, snap.request, snap.n);
  CHECK(redo.certificate.total == bundle.certificate.total);  // bitwise
  CHECK(redo.certificate.privatization_quantile == bundle.certificate.privatization_quantile);
  REQUIRE(redo.measure.weights.size() == bundle.measure.weights.size());
  auto it = bundle.measure.weights.begin();
  for (const auto& [idx, w] : redo.measure.weights) {
    CHECK(idx == it->first);
    CHECK(w == it->second);
    ++it;
  }
  CHECK(certificate_to_json(redo.certificate) == certificate_to_json(bundle.certificate));
}

TEST_CASE("optimizer progress: the release fits nu_dp at least as well as the data") {
  const Dataset data = grid_supported_dataset(80, 2, 4, 41);
  ReleaseRequest req;
  req.spec = GridSpec{2, 1, 4};
  req.budget = PrivacyBudget{0.7, 0.0};
  req.mc_samples = 10;
  for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
    req.seed = seed;
    const ReleaseBundle bundle = run_algorithm1(data, req);
    const auto v = apply_T(empirical_measure(data, req.spec), req.spec);
    CHECK(proxy_lt(bundle.nu_dp, apply_T(bundle.measure, req.spec), req.spec) <=
          proxy_lt(bundle.nu_dp, v, req.spec) + 1e-9);
  }
}

TEST_CASE("certify: zero projection at the fixed point, k monotonicity") {
  GridSpec spec{2, 1, 4};
  const Dataset data = grid_supported_dataset(30, 2, 4, 51);
  const auto v = apply_T(empirical_measure(data, spec), spec);
  const auto mu = right_inverse([&] {
    GridSpec joint{2, 2, 4};
    return apply_T(empirical_measure(data, joint), joint);
  }());
  const auto cert = certify(mu, v, spec, 0.25, ProxyLossKind::UT);
  CHECK(cert.projection_error <= 1e-9);
  CHECK(cert.discretization_error == doctest::Approx(1.0 / 8).epsilon(1e-15));
  CHECK(cert.total == doctest::Approx(1.0 / 8 + 0.25).epsilon(1e-9));

  const auto cert16 = certify([&] {
    GridSpec fine{2, 1, 16};
    GridHistogram h;
    h.dims = 2;
    h.k = 16;
    h.add({0, 0}, 1.0);
    return h;
  }(), MarginalBlockVector(GridSpec{2, 1, 16}), GridSpec{2, 1, 16}, 0.0, ProxyLossKind::LT);
  CHECK(cert16.discretization_error < cert.discretization_error);
}

TEST_CASE("coverage: the certificate bounds the exactly computable loss") {
  // Small version of the acceptance experiment: the dataset is grid
  // supported, so the true loss is exactly the max marginal W1.
  const int runs = 40;
  GridSpec spec{2, 1, 8};
  const Dataset data = grid_supported_dataset(500, 2, 8, 61);
  const GridHistogram input = empirical_measure(data, spec);
  int covered = 0;
  for (int r = 0; r < runs; ++r) {
    ReleaseRequest req;
    req.spec = spec;
    req.budget = PrivacyBudget{1.0, 0.0};
    req.delta_fail = 0.1;
    req.mc_samples = 200;
    req.seed = 100 + static_cast<std::uint64_t>(r);
    const ReleaseBundle bundle = run_algorithm1(data, req);
    const double true_loss = utility_loss_bounds(input, bundle.measure, 1, 8).ub;
    if (true_loss <= bundle.certificate.total) ++covered;
  }
  CHECK(covered >= static_cast<int>(0.87 * runs));
}

TEST_CASE("sample_synthetic: point mass, binomial bands, rejects n_out = 0") {
  GridHistogram point;
  point.dims = 2;
  point.k = 4;
  point.add({2, 1}, 1.0);
  CounterRng rng(71);
  const Dataset d = sample_synthetic(point, 25, rng);
  for (const auto& p : d.points) {
    CHECK(p[0] == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.375).epsilon(1e-15));
  }

  GridHistogram two;
  two.dims = 1;
  two.k = 2;
  two.add({0}, 0.3);
  two.add({1}, 0.7);
  const int n = 100000;
  const Dataset big = sample_synthetic(two, n, rng);
  int low = 0;
  for (const auto& p : big.points)
    if (p[0] < 0.5) ++low;
  const double sigma = std::sqrt(0.3 * 0.7 * n);
  CHECK(std::abs(low - 0.3 * n) <= 3.0 * sigma);

  CHECK_THROWS_AS(sample_synthetic(point, 0, rng), std::invalid_argument);
  GridHistogram bad;
  bad.dims = 1;
  bad.k = 2;
  bad.add({0}, 0.4);
  CHECK_THROWS_AS(sample_synthetic(bad, 5, rng), std::invalid_argument);
}

TEST_CASE("certificate and measure serialization round trips") {
  Certificate cert;
  cert.discretization_error = 0.0625;
  cert.privatization_quantile = 0.0123456789012345;
  cert.projection_error = 0.001;
  cert.total = cert.discretization_error + cert.privatization_quantile + cert.projection_error;
  cert.k = 8;
  cert.s = 1;
  cert.d = 2;
  cert.epsilon = 1.0;
  cert.seed = 42;
  const Certificate back = certificate_from_json(certificate_to_json(cert));
  CHECK(back.total == cert.total);
  CHECK(back.privatization_quantile == cert.privatization_quantile);
  CHECK(back.seed == cert.seed);

  GridHistogram h;
  h.dims = 2;
  h.k = 4;
  h.add({1, 2}, 0.25);
  h.add({0, 0}, 0.75);
  const GridHistogram hb = measure_from_json(measure_to_json(h));
  CHECK(hb.weights == h.weights);
}
