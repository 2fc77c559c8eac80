#pragma once

#include <span>
#include <vector>

#include "dpsynth/grid.hpp"

namespace dpsynth {

// Stacked vector of all discretized s-marginals: one block of length k^s per
// size-s subset, subsets in lexicographic order, each block in snake order.
struct MarginalBlockVector {
  GridSpec spec;
  std::vector<double> data;

  explicit MarginalBlockVector(const GridSpec& spec_in)
      : spec(spec_in), data(spec_in.total_len(), 0.0) {
    spec.validate();
  }

  std::span<double> block(std::uint64_t j) {
    return std::span<double>(data).subspan(j * spec.block_len(), spec.block_len());
  }
  std::span<const double> block(std::uint64_t j) const {
    return std::span<const double>(data).subspan(j * spec.block_len(), spec.block_len());
  }
};

// Query operator: h on the k-grid of spec to its stacked marginal vector.
MarginalBlockVector apply_T(const GridHistogram& h, const GridSpec& spec);

// Right-inverse, materialized only in the s = d case where the joint measure
// is determined: the histogram whose snake-ordered weights equal v.
GridHistogram right_inverse(const MarginalBlockVector& v);

// Worst-case l1 sensitivity of apply_T over single-point swaps, 2 C(d,s) / n.
double sensitivity(const GridSpec& spec, std::size_t n);

// Exhaustive sensitivity over all (index, replacement) swaps; the oracle the
// closed form is tested against.
double brute_force_sensitivity(const Dataset& dataset, const GridSpec& spec,
                               const std::vector<std::vector<double>>& candidates);

}  // namespace dpsynth
