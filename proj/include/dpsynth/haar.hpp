#pragma once

#include <cstdint>
#include <vector>

namespace dpsynth {

// Scaled transposed Haar operator Phi = (kappa + 1) * M_kappa, where M_kappa
// is the order-2^kappa transposed Haar matrix. Column l1 norms of Phi^{-1}
// are all exactly 1, which is what calibrates the correlated noise. Stored
// implicitly; the dense form exists only for verification.
struct HaarOperator {
  int kappa = 0;        // level count, operator order is 2^kappa
  double scale = 1.0;   // kappa + 1

  std::uint64_t order() const { return 1ull << kappa; }
};

// Operator embedding a block of length m (kappa = ceil(log2 m), kappa = 0
// for m = 1).
HaarOperator build_phi(std::uint64_t m);

// Exact product Phi * x via the level-recursive reconstruction, O(order).
std::vector<double> phi_apply(const HaarOperator& op, const std::vector<double>& x);

// Dense Phi built directly from the level structure (test/verification path).
std::vector<std::vector<double>> dense_phi(const HaarOperator& op);

// Dense Phi^{-1}: the sign pattern of Phi^T divided by scale.
std::vector<std::vector<double>> dense_phi_inverse(const HaarOperator& op);

struct PhiLemmaReport {
  double inv_col_norm_max = 0.0;       // max column l1 norm of Phi^{-1}
  double partial_row_sum_l1_max = 0.0; // max_i || sum_{j<=i} Phi_j ||_1 over rows
  double partial_row_sum_l2_max = 0.0; // same in l2
};

PhiLemmaReport verify_phi_lemma(const HaarOperator& op);

}  // namespace dpsynth
