#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "membrane/lattice.hpp"

namespace membrane {

/// One real value per site of V_N; implicitly zero outside.
class LatticeFunction {
 public:
  explicit LatticeFunction(BoxDomain domain) : domain_(domain), values_(domain.site_count(), 0.0) {}
  LatticeFunction(BoxDomain domain, std::vector<double> values);

  const BoxDomain& domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at(const Site& x) const { return values_[domain_.index(x)]; }
  /// Zero-extended evaluation on all of Z^n.
  double extended(const Site& x) const { return domain_.contains(x) ? values_[domain_.index(x)] : 0.0; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  BoxDomain domain_;
  std::vector<double> values_;
};

/// Δu on V_{N+1} for u supported in V_N. Δu vanishes outside V_{N+1}.
LatticeFunction laplacian_extended(const LatticeFunction& u);

/// ‖Δf‖² summed over Z^n (equivalently over V_{N+1}).
double dirichlet_energy(const LatticeFunction& f);

/// (Δf, Δg) summed over Z^n. Throws ContractError on a domain mismatch.
double laplacian_pairing(const LatticeFunction& f, const LatticeFunction& g);

/// Symmetric CSR matrix of Δ² on V_N with zero exterior data, Q = AᵀA where A: V_N -> V_{N+1} is Δ.
class PrecisionOperator {
 public:
  const BoxDomain& domain() const { return domain_; }
  std::size_t rows() const { return row_start_.size() - 1; }
  std::size_t nonzeros() const { return values_.size(); }
  /// Largest |i - j| over stored entries.
  std::size_t bandwidth() const { return bandwidth_; }

  double entry(std::size_t i, std::size_t j) const;
  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;
  double quadratic_form(std::span<const double> x) const;
  double bilinear_form(std::span<const double> x, std::span<const double> y) const;

  std::span<const std::size_t> row_start() const { return row_start_; }
  std::span<const std::size_t> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

  /// Builds a precision from explicit CSR data (must be symmetric); used for synthetic test models.
  static PrecisionOperator from_csr(BoxDomain domain, std::vector<std::size_t> row_start,
                                    std::vector<std::size_t> columns, std::vector<double> values);

  friend PrecisionOperator assemble_precision(const BoxDomain& domain);

 private:
  explicit PrecisionOperator(BoxDomain domain) : domain_(domain) {}

  BoxDomain domain_;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> columns_;
  std::vector<double> values_;
  std::size_t bandwidth_ = 0;
};

PrecisionOperator assemble_precision(const BoxDomain& domain);

/// Coordinate export: header "rows nnz", then "row col value" per stored entry (0-based).
void write_coordinate(std::ostream& out, const PrecisionOperator& q);

}  // namespace membrane
