#include "dpsynth/haar.hpp"

#include <cmath>
#include <stdexcept>

#include "dpsynth/errors.hpp"

namespace dpsynth {

HaarOperator build_phi(std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("build_phi: m must be positive");
  if (m > guards::kMaxGridPoints)
    throw CapacityError("build_phi: block length exceeds size guard");
  int kappa = 0;
  while ((1ull << kappa) < m) ++kappa;
  HaarOperator op;
  op.kappa = kappa;
  op.scale = static_cast<double>(kappa + 1);
  return op;
}

std::vector<double> phi_apply(const HaarOperator& op, const std::vector<double>& x) {
  const std::uint64_t n = op.order();
  if (x.size() != n) throw std::invalid_argument("phi_apply: length mismatch");
  // Coefficients for levels L_0..L_l occupy the first 2^l entries of x;
  // each step folds in the next level of details.
  std::vector<double> y{x[0]};
  std::vector<double> next;
  for (int l = 1; l <= op.kappa; ++l) {
    const std::uint64_t half = 1ull << (l - 1);
    next.resize(2 * half);
    for (std::uint64_t i = 0; i < half; ++i) {
      const double fine = x[half + i];
      next[2 * i] = (y[i] + fine) / 2.0;
      next[2 * i + 1] = (y[i] - fine) / 2.0;
    }
    y.swap(next);
  }
  for (double& v : y) v *= op.scale;
  return y;
}

std::vector<std::vector<double>> dense_phi(const HaarOperator& op) {
  const std::uint64_t n = op.order();
  if (n > guards::kMaxDenseHaarOrder)
    throw CapacityError("dense_phi: order exceeds dense guard");
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  std::uint64_t col = 0;
  for (int l = 0; l <= op.kappa; ++l) {
    const std::uint64_t ncols = l == 0 ? 1 : (1ull << (l - 1));
    const double mag =
        static_cast<double>(l == 0 ? 1 : (1ull << (l - 1))) / static_cast<double>(n);
    const int support_log = std::min(op.kappa, op.kappa - l + 1);
    const std::uint64_t support = 1ull << support_log;
    for (std::uint64_t c = 0; c < ncols; ++c, ++col) {
      const std::uint64_t start = c * support;
      if (l == 0) {
        for (std::uint64_t r = 0; r < support; ++r) M[start + r][col] = mag * op.scale;
      } else {
        for (std::uint64_t r = 0; r < support / 2; ++r) {
          M[start + r][col] = mag * op.scale;
          M[start + support / 2 + r][col] = -mag * op.scale;
        }
      }
    }
  }
  return M;
}

std::vector<std::vector<double>> dense_phi_inverse(const HaarOperator& op) {
  // All nonzero entries of M_kappa^{-1} are +-1 at the transposed positions
  // of M_kappa, so Phi^{-1} = sign(Phi^T) / scale.
  const auto M = dense_phi(op);
  const std::uint64_t n = op.order();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j) {
      if (M[j][i] > 0)
        inv[i][j] = 1.0 / op.scale;
      else if (M[j][i] < 0)
        inv[i][j] = -1.0 / op.scale;
    }
  return inv;
}

PhiLemmaReport verify_phi_lemma(const HaarOperator& op) {
  const std::uint64_t n = op.order();
  if (n > guards::kMaxDenseHaarOrder)
    throw CapacityError("verify_phi_lemma: order exceeds dense guard");
  const auto M = dense_phi(op);
  const auto inv = dense_phi_inverse(op);
  PhiLemmaReport report;
  for (std::uint64_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) col += std::abs(inv[i][j]);
    report.inv_col_norm_max = std::max(report.inv_col_norm_max, col);
  }
  std::vector<double> partial(n, 0.0);
  for (std::uint64_t i = 0; i < n; ++i) {
    double l1 = 0.0, l2 = 0.0;
    for (std::uint64_t j = 0; j < n; ++j) {
      partial[j] += M[i][j];
      l1 += std::abs(partial[j]);
      l2 += partial[j] * partial[j];
    }
    report.partial_row_sum_l1_max = std::max(report.partial_row_sum_l1_max, l1);
    report.partial_row_sum_l2_max = std::max(report.partial_row_sum_l2_max, std::sqrt(l2));
  }
  return report;
}

}  // namespace dpsynth
