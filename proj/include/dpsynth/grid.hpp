#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace dpsynth {

using MultiIndex = std::vector<std::uint32_t>;

// Geometry of the marginal query family on [0,1]^d: ambient dimension d,
// marginal sparsity s and cells per axis k. The size-s subsets S_j are
// enumerated in lexicographic order; their order is part of the wire format
// of every stacked marginal vector.
struct GridSpec {
  int d = 1;
  int s = 1;
  int k = 1;

  void validate() const;

  // Number of size-s subsets, C(d, s).
  std::uint64_t num_subsets() const;
  // Cells per marginal block, k^s.
  std::uint64_t block_len() const;
  // Stacked vector length, C(d,s) * k^s.
  std::uint64_t total_len() const;
};

// All size-s subsets of {0,...,d-1} in lexicographic order.
std::vector<std::vector<int>> enumerate_subsets(int d, int s);

// k^r with the materialization guard applied.
std::uint64_t checked_grid_size(int k, int r);

struct Dataset {
  std::vector<std::vector<double>> points;

  std::size_t n() const { return points.size(); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
  void validate() const;  // nonempty, rectangular, coordinates in [0,1]
};

// A (possibly signed) measure supported on centers of the k-grid over
// [0,1]^dims. Weights are keyed by the multi-index of the cell.
struct GridHistogram {
  int dims = 1;
  int k = 1;
  std::map<MultiIndex, double> weights;

  double mass() const;
  bool is_probability(double tol = 1e-12) const;
  void add(const MultiIndex& idx, double w);

  // Center coordinates of a cell, ((2 i_j + 1) / 2k)_j.
  std::vector<double> center(const MultiIndex& idx) const;
};

// Boustrophedon traversal of {0,...,k-1}^s: consecutive path positions
// differ by exactly 1 in exactly one axis, so consecutive centers are at
// l-infinity distance 1/k. Axis 0 is the fastest axis.
class SnakeOrder {
 public:
  SnakeOrder(int k, int s);

  std::uint64_t size() const { return size_; }
  int k() const { return k_; }
  int s() const { return s_; }

  MultiIndex index_at(std::uint64_t position) const;
  std::uint64_t position_of(const MultiIndex& idx) const;

 private:
  int k_;
  int s_;
  std::uint64_t size_;
  std::vector<std::uint64_t> stride_;  // k^a for axis a
};

// All k^r centers of the grid on [0,1]^r, listed in snake order.
std::vector<std::vector<double>> grid_centers(int k, int r);

SnakeOrder snake_order(int k, int s);

// Cell assignment of a point in [0,1]^r; boundary x_j = 1 clamps to the last
// cell, interior boundaries round up (floor semantics).
MultiIndex discretize_point(const std::vector<double>& x, int k);

// Empirical measure of the dataset discretized onto the k-grid of spec.
GridHistogram empirical_measure(const Dataset& dataset, const GridSpec& spec);

// Push-forward of h onto the coordinates in subset (mass preserving).
GridHistogram marginal_project(const GridHistogram& h, const std::vector<int>& subset);

// Number of distinct occupied cells of the k-grid, |q_{1/2k}(D)|.
std::uint64_t support_count(const Dataset& dataset, int k);

}  // namespace dpsynth
