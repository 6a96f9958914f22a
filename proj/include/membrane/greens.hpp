#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "membrane/banded_cholesky.hpp"
#include "membrane/lattice.hpp"
#include "membrane/operator.hpp"

namespace membrane {

/// Cholesky factor of the precision, Q = L Lᵀ, in the row-major site ordering.
class PrecisionFactor {
 public:
  PrecisionFactor(const PrecisionOperator& q);

  const BoxDomain& domain() const { return domain_; }
  const BandedCholesky& cholesky() const { return chol_; }
  std::size_t size() const { return chol_.size(); }

 private:
  BoxDomain domain_;
  BandedCholesky chol_;
};

/// Throws InvariantViolation if Q is not positive definite.
PrecisionFactor factorize(const PrecisionOperator& q);

struct GreensColumn {
  Site source;
  LatticeFunction values;  // x -> G_N(x, source)
};

GreensColumn greens_column(const PrecisionFactor& factor, const Site& y);

/// x -> G_N(x, x).
LatticeFunction variance_profile(const PrecisionFactor& factor);

/// Dense G_N, row-major site_count x site_count. Columns are solved independently, so the
/// result does not depend on `workers`.
std::vector<double> greens_matrix(const PrecisionFactor& factor, unsigned workers = 1);

/// G_N restricted to the given sites, |sites| x |sites| row-major.
std::vector<double> greens_submatrix(const PrecisionFactor& factor, const std::vector<Site>& sites);

/// Empirical constants of the four Green's function estimates at one box size.
///   c1, C1: min / max of G(x,x) / d_N(x)^{4-n}
///   C2:     max over axis neighbours y of x of |G(x,x) - G(x,y)| / d_N(x)^{3-n}, using
///           G(x,y) = 0 for y outside V_N
///           (|x-y|_inf = 1, so this is also the discrete-gradient constant)
///   C4:     max over x, y of |G(x,y)| (|x-y|_inf + 1)^n / (d_N(x)^2 d_N(y)^2)
struct BoundConstants {
  int dim = 0;
  int half_width = 0;
  double c1 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C4 = 0.0;
};

BoundConstants fit_bound_constants(const PrecisionFactor& factor, unsigned workers = 1);

/// Largest ratio max(a, b) / min(a, b) over the four constants of two tables.
double max_constant_ratio(const BoundConstants& a, const BoundConstants& b);

void write_constants_header(std::ostream& out);
void write_constants_row(std::ostream& out, const BoundConstants& c);

}  // namespace membrane
