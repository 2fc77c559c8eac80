#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "dpsynth/errors.hpp"
#include "dpsynth/grid.hpp"
#include "dpsynth/rng.hpp"

using namespace dpsynth;

TEST_CASE("grid centers in 1D and degenerate grids") {
  const auto c1 = grid_centers(2, 1);
  REQUIRE(c1.size() == 2);
  CHECK(c1[0][0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(c1[1][0] == doctest::Approx(0.75).epsilon(1e-15));

  const auto c2 = grid_centers(1, 3);
  REQUIRE(c2.size() == 1);
  for (double x : c2[0]) CHECK(x == 0.5);
}

TEST_CASE("grid centers follow the boustrophedon order") {
  const auto c = grid_centers(2, 2);
  REQUIRE(c.size() == 4);
  CHECK(c[0] == std::vector<double>{0.25, 0.25});
  CHECK(c[1] == std::vector<double>{0.75, 0.25});
  CHECK(c[2] == std::vector<double>{0.75, 0.75});
  CHECK(c[3] == std::vector<double>{0.25, 0.75});
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    double gap = 0;
    for (std::size_t j = 0; j < c[i].size(); ++j) gap = std::max(gap, std::abs(c[i][j] - c[i + 1][j]));
    CHECK(gap == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("snake order is a bijection with unit steps for all k <= 4, s <= 3") {
  for (int k = 1; k <= 4; ++k) {
    for (int s = 1; s <= 3; ++s) {
      const SnakeOrder order(k, s);
      std::set<MultiIndex> seen;
      MultiIndex prev;
      for (std::uint64_t p = 0; p < order.size(); ++p) {
        const MultiIndex idx = order.index_at(p);
        CHECK(order.position_of(idx) == p);
        seen.insert(idx);
        if (p > 0) {
          int changed = 0;
          int delta = 0;
          for (int a = 0; a < s; ++a) {
            if (idx[a] != prev[a]) {
              ++changed;
              delta = std::abs(static_cast<int>(idx[a]) - static_cast<int>(prev[a]));
            }
          }
          CHECK(changed == 1);
          CHECK(delta == 1);
        }
        prev = idx;
      }
      CHECK(seen.size() == order.size());
    }
  }
}

TEST_CASE("snake order matches the hand enumerations") {
  const SnakeOrder o1(3, 1);
  for (std::uint64_t p = 0; p < 3; ++p) CHECK(o1.index_at(p) == MultiIndex{static_cast<std::uint32_t>(p)});

  const SnakeOrder o2(2, 2);
  CHECK(o2.index_at(0) == MultiIndex{0, 0});
  CHECK(o2.index_at(1) == MultiIndex{1, 0});
  CHECK(o2.index_at(2) == MultiIndex{1, 1});
  CHECK(o2.index_at(3) == MultiIndex{0, 1});
}

TEST_CASE("discretize_point clamps boundaries and rounds interior ties up") {
  CHECK(discretize_point({0.0}, 4) == MultiIndex{0});
  CHECK(discretize_point({1.0}, 4) == MultiIndex{3});
  CHECK(discretize_point({0.26}, 2) == MultiIndex{0});
  CHECK(discretize_point({0.5}, 2) == MultiIndex{1});  // interior tie goes up
  CHECK_THROWS_AS(discretize_point({1.2}, 4), std::invalid_argument);
  CHECK_THROWS_AS(discretize_point({-0.1}, 4), std::invalid_argument);
}

TEST_CASE("discretized center is within 1/2k for random points") {
  CounterRng rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 1 + static_cast<int>(rng.next_below(8));
    const int d = 1 + static_cast<int>(rng.next_below(4));
    std::vector<double> x(d);
    for (auto& v : x) v = rng.next_double();
    const MultiIndex idx = discretize_point(x, k);
    for (int j = 0; j < d; ++j) {
      const double center = (2.0 * idx[j] + 1.0) / (2.0 * k);
      CHECK(std::abs(x[j] - center) <= 0.5 / k + 1e-15);
    }
  }
}

TEST_CASE("empirical measure basics") {
  GridSpec spec{1, 1, 2};
  Dataset one{{{0.3}}};
  const auto h1 = empirical_measure(one, spec);
  REQUIRE(h1.weights.size() == 1);
  CHECK(h1.weights.at({0}) == 1.0);

  Dataset dup{{{0.3}, {0.3}}};
  const auto h2 = empirical_measure(dup, spec);
  REQUIRE(h2.weights.size() == 1);
  CHECK(h2.weights.at({0}) == 1.0);

  Dataset two{{{0.1}, {0.9}}};
  const auto h3 = empirical_measure(two, spec);
  CHECK(h3.weights.at({0}) == 0.5);
  CHECK(h3.weights.at({1}) == 0.5);
}

TEST_CASE("marginal projection: identity, point mass, product measure") {
  GridSpec spec{3, 2, 2};
  Dataset data{{{0.1, 0.6, 0.9}, {0.7, 0.2, 0.4}, {0.1, 0.1, 0.1}}};
  const auto h = empirical_measure(data, spec);

  const auto full = marginal_project(h, {0, 1, 2});
  CHECK(full.weights == h.weights);

  GridHistogram point;
  point.dims = 3;
  point.k = 2;
  point.add({1, 0, 1}, 1.0);
  const auto proj = marginal_project(point, {0, 2});
  REQUIRE(proj.weights.size() == 1);
  CHECK(proj.weights.at({1, 1}) == 1.0);

  // Product measure: marginals of the product equal products of marginals.
  GridHistogram prod;
  prod.dims = 3;
  prod.k = 2;
  const double px[2] = {0.3, 0.7}, py[2] = {0.6, 0.4}, pz[2] = {0.2, 0.8};
  for (std::uint32_t a = 0; a < 2; ++a)
    for (std::uint32_t b = 0; b < 2; ++b)
      for (std::uint32_t c = 0; c < 2; ++c) prod.add({a, b, c}, px[a] * py[b] * pz[c]);
  const auto m01 = marginal_project(prod, {0, 1});
  for (std::uint32_t a = 0; a < 2; ++a)
    for (std::uint32_t b = 0; b < 2; ++b)
      CHECK(m01.weights.at({a, b}) == doctest::Approx(px[a] * py[b]).epsilon(1e-12));
}

TEST_CASE("marginal projection preserves mass and commutes with discretization") {
  CounterRng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_below(3));
    const int k = 1 + static_cast<int>(rng.next_below(4));
    const int s = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(d)));
    GridSpec spec{d, s, k};
    Dataset data;
    const int n = 5 + static_cast<int>(rng.next_below(40));
    for (int i = 0; i < n; ++i) {
      std::vector<double> p(d);
      for (auto& v : p) v = rng.next_double();
      data.points.push_back(p);
    }
    const auto h = empirical_measure(data, spec);
    for (const auto& S : enumerate_subsets(d, s)) {
      const auto proj = marginal_project(h, S);
      CHECK(std::abs(proj.mass() - 1.0) <= 1e-12);
      // Discretize the coordinate-projected dataset directly.
      Dataset projected;
      for (const auto& p : data.points) {
        std::vector<double> q(S.size());
        for (std::size_t j = 0; j < S.size(); ++j) q[j] = p[static_cast<std::size_t>(S[j])];
        projected.points.push_back(q);
      }
      GridSpec sub_spec{static_cast<int>(S.size()), static_cast<int>(S.size()), k};
      const auto direct = empirical_measure(projected, sub_spec);
      CHECK(direct.weights == proj.weights);  // exact equality of weight maps
    }
  }
}

TEST_CASE("support counting") {
  Dataset same{{{0.2, 0.2}, {0.2, 0.2}, {0.2, 0.2}}};
  CHECK(support_count(same, 8) == 1);
  CHECK(support_count(same, 1) == 1);

  // 1D segment embedded in d = 2 occupies at most k cells.
  Dataset segment;
  for (int i = 0; i < 200; ++i)
    segment.points.push_back({static_cast<double>(i) / 199.0, 0.4});
  for (int k = 1; k <= 16; ++k) CHECK(support_count(segment, k) <= static_cast<std::uint64_t>(k));
}

TEST_CASE("size guards refuse oversized grids") {
  CHECK_THROWS_AS(grid_centers(2, 21), CapacityError);
  CHECK_THROWS_AS(checked_grid_size(1 << 11, 2), CapacityError);
  CHECK(checked_grid_size(1 << 10, 2) == (1ull << 20));
}

TEST_CASE("dataset and spec validation") {
  Dataset bad{{{0.5, 1.5}}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  Dataset empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
  GridSpec bad_spec{2, 3, 4};
  CHECK_THROWS_AS(bad_spec.validate(), std::invalid_argument);
}
