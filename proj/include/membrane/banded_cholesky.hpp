#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace membrane {

class PrecisionOperator;

/// Cholesky factor Q = L Lᵀ of a symmetric positive definite band matrix.
///
/// Column j of L is stored contiguously as L(j, j), L(j+1, j), ..., L(j+b, j), so both
/// triangular solves run as unit-stride loops. Rows past the end are zero padding.
class BandedCholesky {
 public:
  BandedCholesky() = default;

  /// Factorizes the lower band of `q`. Throws InvariantViolation on a nonpositive pivot.
  explicit BandedCholesky(const PrecisionOperator& q);

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return b_; }
  double diagonal(std::size_t j) const { return band_[j * stride()]; }
  /// L(i, j), zero outside the band or above the diagonal.
  double entry(std::size_t i, std::size_t j) const;

  /// Solves L y = rhs in place.
  void solve_lower(std::span<double> x) const;
  /// Solves Lᵀ y = rhs in place.
  void solve_upper(std::span<double> x) const;
  /// Q x = L (Lᵀ x).
  std::vector<double> multiply(std::span<const double> x) const;

  /// Solves Q y = rhs in place.
  void solve(std::span<double> x) const;

  /// Solves Lᵀ Y = Z in place for `count` right-hand sides stored interleaved:
  /// entry (row i, rhs r) lives at x[i * count + r].
  void solve_upper_multi(std::span<double> x, std::size_t count) const;

  /// ‖L⁻¹ e_j‖² = (Q⁻¹)_{jj}; the forward solve starts at row j.
  double inverse_diagonal(std::size_t j, std::vector<double>& work) const;

 private:
  std::size_t stride() const { return b_ + 1; }

  std::size_t n_ = 0;
  std::size_t b_ = 0;
  std::vector<double> band_;
};

}  // namespace membrane
