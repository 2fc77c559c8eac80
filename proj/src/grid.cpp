#include "dpsynth/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpsynth/errors.hpp"

namespace dpsynth {

void GridSpec::validate() const {
  if (d < 1) throw std::invalid_argument("GridSpec: d must be positive");
  if (s < 1 || s > d) throw std::invalid_argument("GridSpec: need 1 <= s <= d");
  if (k < 1) throw std::invalid_argument("GridSpec: k must be positive");
  block_len();  // guard k^s
  total_len();  // guard C(d,s) * k^s
}

std::uint64_t GridSpec::num_subsets() const {
  // C(d, s) with overflow care; d is small in practice.
  std::uint64_t r = 1;
  for (int i = 0; i < s; ++i) {
    std::uint64_t num = static_cast<std::uint64_t>(d - i);
    if (r > (~0ull) / num) throw CapacityError("GridSpec: C(d,s) overflows");
    r = r * num / (i + 1);
  }
  return r;
}

std::uint64_t GridSpec::block_len() const { return checked_grid_size(k, s); }

std::uint64_t GridSpec::total_len() const {
  std::uint64_t K = num_subsets();
  std::uint64_t bl = block_len();
  if (K > guards::kMaxGridPoints / bl + 1 || K * bl > guards::kMaxGridPoints)
    throw CapacityError("GridSpec: stacked marginal vector exceeds size guard");
  return K * bl;
}

std::vector<std::vector<int>> enumerate_subsets(int d, int s) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(s);
  for (int i = 0; i < s; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = s - 1;
    while (i >= 0 && cur[i] == d - s + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < s; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

std::uint64_t checked_grid_size(int k, int r) {
  if (k < 1 || r < 1) throw std::invalid_argument("grid size: k, r must be positive");
  std::uint64_t size = 1;
  for (int i = 0; i < r; ++i) {
    size *= static_cast<std::uint64_t>(k);
    if (size > guards::kMaxGridPoints)
      throw CapacityError("grid size k^r exceeds the 2^20 materialization guard");
  }
  return size;
}

void Dataset::validate() const {
  if (points.empty()) throw std::invalid_argument("Dataset: empty");
  const std::size_t d = points.front().size();
  if (d == 0) throw std::invalid_argument("Dataset: zero-dimensional point");
  for (const auto& p : points) {
    if (p.size() != d) throw std::invalid_argument("Dataset: ragged rows");
    for (double x : p)
      if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("Dataset: coordinate outside [0,1]");
  }
}

double GridHistogram::mass() const {
  double m = 0;
  for (const auto& [idx, w] : weights) m += w;
  return m;
}

bool GridHistogram::is_probability(double tol) const {
  for (const auto& [idx, w] : weights)
    if (w < -tol) return false;
  return std::abs(mass() - 1.0) <= tol;
}

void GridHistogram::add(const MultiIndex& idx, double w) {
  if (static_cast<int>(idx.size()) != dims)
    throw std::invalid_argument("GridHistogram: index arity mismatch");
  for (auto i : idx)
    if (i >= static_cast<std::uint32_t>(k))
      throw std::invalid_argument("GridHistogram: index out of bounds");
  weights[idx] += w;
}

std::vector<double> GridHistogram::center(const MultiIndex& idx) const {
  std::vector<double> c(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j)
    c[j] = (2.0 * idx[j] + 1.0) / (2.0 * k);
  return c;
}

SnakeOrder::SnakeOrder(int k, int s) : k_(k), s_(s) {
  size_ = checked_grid_size(k, s);
  stride_.resize(s);
  std::uint64_t acc = 1;
  for (int a = 0; a < s; ++a) {
    stride_[a] = acc;
    acc *= static_cast<std::uint64_t>(k);
  }
}

MultiIndex SnakeOrder::index_at(std::uint64_t position) const {
  if (position >= size_) throw std::invalid_argument("SnakeOrder: position out of range");
  MultiIndex idx(s_);
  // Plain mixed-radix digits, then reflect each digit when the sum of the
  // final digits above it is odd.
  std::uint64_t rem = position;
  std::uint32_t parity = 0;
  for (int a = s_ - 1; a >= 0; --a) {
    std::uint32_t digit = static_cast<std::uint32_t>(rem / stride_[a]);
    rem %= stride_[a];
    std::uint32_t value = (parity & 1) ? static_cast<std::uint32_t>(k_ - 1) - digit : digit;
    idx[a] = value;
    parity += value;
  }
  return idx;
}

std::uint64_t SnakeOrder::position_of(const MultiIndex& idx) const {
  if (static_cast<int>(idx.size()) != s_)
    throw std::invalid_argument("SnakeOrder: index arity mismatch");
  std::uint64_t pos = 0;
  std::uint32_t parity = 0;
  for (int a = s_ - 1; a >= 0; --a) {
    std::uint32_t value = idx[a];
    if (value >= static_cast<std::uint32_t>(k_))
      throw std::invalid_argument("SnakeOrder: index out of bounds");
    std::uint32_t digit = (parity & 1) ? static_cast<std::uint32_t>(k_ - 1) - value : value;
    pos += digit * stride_[a];
    parity += value;
  }
  return pos;
}

std::vector<std::vector<double>> grid_centers(int k, int r) {
  SnakeOrder order(k, r);
  std::vector<std::vector<double>> centers;
  centers.reserve(order.size());
  for (std::uint64_t p = 0; p < order.size(); ++p) {
    MultiIndex idx = order.index_at(p);
    std::vector<double> c(r);
    for (int j = 0; j < r; ++j) c[j] = (2.0 * idx[j] + 1.0) / (2.0 * k);
    centers.push_back(std::move(c));
  }
  return centers;
}

SnakeOrder snake_order(int k, int s) { return SnakeOrder(k, s); }

MultiIndex discretize_point(const std::vector<double>& x, int k) {
  MultiIndex idx(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] >= 0.0 && x[j] <= 1.0))
      throw std::invalid_argument("discretize_point: coordinate outside [0,1]");
    auto cell = static_cast<std::int64_t>(std::floor(x[j] * k));
    idx[j] = static_cast<std::uint32_t>(std::min<std::int64_t>(cell, k - 1));
  }
  return idx;
}

GridHistogram empirical_measure(const Dataset& dataset, const GridSpec& spec) {
  dataset.validate();
  spec.validate();
  if (dataset.dim() != spec.d)
    throw std::invalid_argument("empirical_measure: dataset dimension mismatch");
  GridHistogram h;
  h.dims = spec.d;
  h.k = spec.k;
  const double w = 1.0 / static_cast<double>(dataset.n());
  for (const auto& p : dataset.points) h.weights[discretize_point(p, spec.k)] += w;
  return h;
}

GridHistogram marginal_project(const GridHistogram& h, const std::vector<int>& subset) {
  if (subset.empty()) throw std::invalid_argument("marginal_project: empty subset");
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] < 0 || subset[i] >= h.dims)
      throw std::invalid_argument("marginal_project: coordinate out of range");
    if (i > 0 && subset[i] <= subset[i - 1])
      throw std::invalid_argument("marginal_project: subset must be strictly increasing");
  }
  GridHistogram out;
  out.dims = static_cast<int>(subset.size());
  out.k = h.k;
  MultiIndex sub(subset.size());
  for (const auto& [idx, w] : h.weights) {
    for (std::size_t i = 0; i < subset.size(); ++i) sub[i] = idx[subset[i]];
    out.weights[sub] += w;
  }
  return out;
}

std::uint64_t support_count(const Dataset& dataset, int k) {
  dataset.validate();
  if (k < 1) throw std::invalid_argument("support_count: k must be positive");
  std::map<MultiIndex, char> seen;
  for (const auto& p : dataset.points) seen[discretize_point(p, k)] = 1;
  return seen.size();
}

}  // namespace dpsynth
