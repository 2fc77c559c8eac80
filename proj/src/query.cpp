#include "dpsynth/query.hpp"

#include <cmath>
#include <stdexcept>

namespace dpsynth {

MarginalBlockVector apply_T(const GridHistogram& h, const GridSpec& spec) {
  spec.validate();
  if (h.dims != spec.d || h.k != spec.k)
    throw std::invalid_argument("apply_T: histogram is not on the grid of spec");
  MarginalBlockVector out(spec);
  const auto subsets = enumerate_subsets(spec.d, spec.s);
  const SnakeOrder order(spec.k, spec.s);
  MultiIndex sub(spec.s);
  for (std::uint64_t j = 0; j < subsets.size(); ++j) {
    auto blk = out.block(j);
    const auto& S = subsets[j];
    for (const auto& [idx, w] : h.weights) {
      for (int i = 0; i < spec.s; ++i) sub[i] = idx[S[i]];
      blk[order.position_of(sub)] += w;
    }
  }
  return out;
}

GridHistogram right_inverse(const MarginalBlockVector& v) {
  const GridSpec& spec = v.spec;
  if (spec.s != spec.d)
    throw std::invalid_argument(
        "right_inverse: only defined for s = d (joint measure is underdetermined otherwise)");
  GridHistogram h;
  h.dims = spec.d;
  h.k = spec.k;
  const SnakeOrder order(spec.k, spec.d);
  for (std::uint64_t p = 0; p < order.size(); ++p) {
    double w = v.data[p];
    if (w != 0.0) h.weights[order.index_at(p)] = w;
  }
  return h;
}

double sensitivity(const GridSpec& spec, std::size_t n) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("sensitivity: n must be positive");
  return 2.0 * static_cast<double>(spec.num_subsets()) / static_cast<double>(n);
}

double brute_force_sensitivity(const Dataset& dataset, const GridSpec& spec,
                               const std::vector<std::vector<double>>& candidates) {
  dataset.validate();
  spec.validate();
  const auto base = apply_T(empirical_measure(dataset, spec), spec);
  double worst = 0.0;
  Dataset swapped = dataset;
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    for (const auto& repl : candidates) {
      swapped.points[i] = repl;
      const auto moved = apply_T(empirical_measure(swapped, spec), spec);
      double l1 = 0.0;
      for (std::size_t t = 0; t < base.data.size(); ++t)
        l1 += std::abs(base.data[t] - moved.data[t]);
      worst = std::max(worst, l1);
    }
    swapped.points[i] = dataset.points[i];
  }
  return worst;
}

}  // namespace dpsynth
