#include "membrane/banded_cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "membrane/errors.hpp"
#include "membrane/operator.hpp"

namespace membrane {

BandedCholesky::BandedCholesky(const PrecisionOperator& q) : n_(q.rows()), b_(q.bandwidth()) {
  const std::size_t s = stride();
  band_.assign(n_ * s, 0.0);
  const auto rs = q.row_start();
  const auto cols = q.columns();
  const auto vals = q.values();
  // Lower triangle: entry (i, j), i >= j, goes to column j offset i - j.
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = rs[i]; k < rs[i + 1]; ++k)
      if (cols[k] <= i) band_[cols[k] * s + (i - cols[k])] = vals[k];

  // Right-looking band Cholesky.
  for (std::size_t j = 0; j < n_; ++j) {
    double* cj = &band_[j * s];
    if (!(cj[0] > 0.0) || !std::isfinite(cj[0]))
      throw InvariantViolation("banded Cholesky: nonpositive pivot at row " + std::to_string(j));
    const double d = std::sqrt(cj[0]);
    const std::size_t len = std::min(b_, n_ - 1 - j);
    cj[0] = d;
    const double inv = 1.0 / d;
    for (std::size_t l = 1; l <= len; ++l) cj[l] *= inv;
    for (std::size_t k = 1; k <= len; ++k) {
      const double f = cj[k];
      if (f == 0.0) continue;
      double* ck = &band_[(j + k) * s];
      for (std::size_t l = k; l <= len; ++l) ck[l - k] -= cj[l] * f;
    }
  }
}

double BandedCholesky::entry(std::size_t i, std::size_t j) const {
  if (i < j || i - j > b_ || i >= n_) return 0.0;
  return band_[j * stride() + (i - j)];
}

void BandedCholesky::solve_lower(std::span<double> x) const {
  if (x.size() != n_) throw ContractError("solve_lower: size mismatch");
  const std::size_t s = stride();
  for (std::size_t j = 0; j < n_; ++j) {
    const double* cj = &band_[j * s];
    const double v = x[j] / cj[0];
    x[j] = v;
    if (v == 0.0) continue;
    const std::size_t len = std::min(b_, n_ - 1 - j);
    double* xj = x.data() + j;
    for (std::size_t l = 1; l <= len; ++l) xj[l] -= cj[l] * v;
  }
}

void BandedCholesky::solve_upper(std::span<double> x) const {
  if (x.size() != n_) throw ContractError("solve_upper: size mismatch");
  const std::size_t s = stride();
  for (std::size_t j = n_; j-- > 0;) {
    const double* cj = &band_[j * s];
    const std::size_t len = std::min(b_, n_ - 1 - j);
    const double* xj = x.data() + j;
    double acc = 0.0;
    for (std::size_t l = 1; l <= len; ++l) acc += cj[l] * xj[l];
    x[j] = (x[j] - acc) / cj[0];
  }
}

std::vector<double> BandedCholesky::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw ContractError("multiply: size mismatch");
  const std::size_t s = stride();
  std::vector<double> y(n_, 0.0), z(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    const double* cj = &band_[j * s];
    const std::size_t len = std::min(b_, n_ - 1 - j);
    double acc = 0.0;
    for (std::size_t l = 0; l <= len; ++l) acc += cj[l] * x[j + l];
    y[j] = acc;
  }
  for (std::size_t j = 0; j < n_; ++j) {
    const double* cj = &band_[j * s];
    const std::size_t len = std::min(b_, n_ - 1 - j);
    for (std::size_t l = 0; l <= len; ++l) z[j + l] += cj[l] * y[j];
  }
  return z;
}

void BandedCholesky::solve(std::span<double> x) const {
  solve_lower(x);
  solve_upper(x);
}

void BandedCholesky::solve_upper_multi(std::span<double> x, std::size_t count) const {
  if (x.size() != n_ * count) throw ContractError("solve_upper_multi: size mismatch");
  const std::size_t s = stride();
  std::vector<double> acc(count);
  for (std::size_t j = n_; j-- > 0;) {
    const double* cj = &band_[j * s];
    const std::size_t len = std::min(b_, n_ - 1 - j);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t l = 1; l <= len; ++l) {
      const double w = cj[l];
      if (w == 0.0) continue;
      const double* row = x.data() + (j + l) * count;
      for (std::size_t r = 0; r < count; ++r) acc[r] += w * row[r];
    }
    double* xj = x.data() + j * count;
    for (std::size_t r = 0; r < count; ++r) xj[r] = (xj[r] - acc[r]) / cj[0];
  }
}

double BandedCholesky::inverse_diagonal(std::size_t j, std::vector<double>& work) const {
  work.assign(n_, 0.0);
  work[j] = 1.0;
  const std::size_t s = stride();
  double sum = 0.0;
  for (std::size_t i = j; i < n_; ++i) {
    const double* ci = &band_[i * s];
    const double v = work[i] / ci[0];
    sum += v * v;
    if (v == 0.0) continue;
    const std::size_t len = std::min(b_, n_ - 1 - i);
    for (std::size_t l = 1; l <= len; ++l) work[i + l] -= ci[l] * v;
  }
  return sum;
}

}  // namespace membrane
