#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "membrane/greens.hpp"
#include "membrane/lattice.hpp"
#include "membrane/operator.hpp"

namespace membrane {

/// Quintic smoothstep: 0 on (-inf, 0], 1 on [1, inf), 6t⁵ - 15t⁴ + 10t³ between. C² everywhere.
double cutoff_eta(double t);

/// sup |η''| for the quintic smoothstep, attained at t = 1/2 ± 1/(2√3).
inline constexpr double kEtaSecondDerivativeBound = 5.773502691896257645;  // 10 / √3

/// Mean shift φ = Σ_{j=k0}^{jmax} φ_j with φ_j(x) = 2^{j(4-n)/2+1} Π_i η(d_i(x) / 2^j),
/// k0 = floor(log2(L+1)), jmax = floor(log2(N+1)).
struct ShiftFunction {
  LatticeFunction phi;
  int inner_margin = 0;  // L; the bound φ >= d_N^{(4-n)/2} holds on V_{N-L}
  double energy = 0.0;   // ‖Δφ‖²
  std::string id;

  /// Wraps an arbitrary mean function (energy computed here); margin -1 means "no guarantee".
  static ShiftFunction from_function(LatticeFunction f, std::string id, int inner_margin = -1);
};

ShiftFunction shift_function(const BoxDomain& domain, int L);

/// Recorded bound on ‖Δφ‖² (L+1)^{n-1} / N^{n-1} over the desk grid (n=2: N <= 32, n=3: N <= 8).
double shift_energy_constant(int dim);

/// min over V_{N-L} of φ(x) - d_N(x)^{(4-n)/2}; nonnegative when the lower bound holds.
double shift_lower_bound_slack(const ShiftFunction& shift);

/// Cube centres whose cubes A_{x,γ} cover V_{N-L}, grouped by dyadic annulus.
struct CoveringSet {
  SiteSet centers;
  double gamma = 0.0;
  int first_annulus = 0;                // k0 = floor(log2(L+1))
  std::vector<SiteSet> per_annulus;     // B_{N,k} for k = k0..max_annulus
};

/// Grid of pitch max(1, floor(γ 2^k)) per annulus, snapped into the annulus. Coverage of V_{N-L}
/// is verified exhaustively; a gap throws InvariantViolation.
CoveringSet covering_set(const BoxDomain& domain, int L, double gamma);

/// Ĉ in |B_N| <= Ĉ γ^{-n} N^{n-1} / (L+1)^{n-1}; recorded over the desk grid for γ in [0.1, 0.49], N >= 1.
double covering_cardinality_constant(int dim);

/// Face points x_n = N - L, other coordinates multiples of ceil(α (L+1)).
SiteSet separated_boundary_sites(const BoxDomain& domain, int L, double alpha);

/// (2 floor((N-L) / ceil(α(L+1))) + 1)^{n-1}.
std::size_t separated_set_size(int dim, int N, int L, double alpha);

struct SeparatedSet {
  SiteSet sites;
  int inner_margin = 0;  // L
  double alpha = 0.0;
  int pitch = 0;
  Eigen::MatrixXd sigma_x;  // correlation matrix of ψ_x / sqrt(G(x,x)), x in E
};

/// Requires 0 <= L <= N/2.
SeparatedSet separated_boundary_set(const PrecisionFactor& factor, int L, double alpha);

/// Largest off-diagonal absolute row sum of Σ_X.
double correlation_sum(const SeparatedSet& set);
double correlation_sum(const Eigen::MatrixXd& sigma);

/// Smallest α in {1, 2, 4, ...} with correlation_sum <= 1/4.
double choose_alpha(const PrecisionFactor& factor, int L);

struct LiShaoCertificate {
  std::size_t set_size = 0;
  double correlation_sum = 0.0;
  double min_eigenvalue = 0.0;
  double log_det_sigma_x = 0.0;
  double log_bound = 0.0;         // log[(1/2)^{|E|} (det Σ_Y / det Σ_X)^{1/2}], Σ_Y = (3/2) I
  double coarse_log_bound = 0.0;  // |E| log(1/√2)
};

/// Refuses (ContractError) unless the correlation sum is <= 1/4.
LiShaoCertificate lishao_certificate(const SeparatedSet& set);
LiShaoCertificate lishao_certificate(const Eigen::MatrixXd& sigma_x);

/// Certificate CSV: n,N,L,alpha,set_size,corr_sum,min_eig_sigma_x,log2_upper_bound.
void write_certificate_header(std::ostream& out);
void write_certificate_row(std::ostream& out, int dim, int N, int L, double alpha, const LiShaoCertificate& c);

using Pseudometric = std::function<double(std::size_t, std::size_t)>;

/// Greedy upper bound on the number of open r-balls covering points 0..count-1; each ball is centred at the
/// uncovered point whose ball holds the most uncovered points.
std::size_t covering_number(std::size_t count, const Pseudometric& metric, double r);
std::size_t covering_number(const SiteSet& points, const std::function<double(const Site&, const Site&)>& metric,
                            double r);

struct DudleyResult {
  double bound = 0.0;             // 24 ∫ sqrt(ln N(A, d_ψ, r)) dr, trapezoid + [0, r_min] cap
  double diameter = 0.0;          // d_ψ-diameter of A
  double quadrature_error = 0.0;  // |T(grid) - T(grid/2)|
  std::size_t points = 0;
};

DudleyResult dudley_integral(const PrecisionFactor& factor, const Site& x0, double gamma, std::size_t grid = 256);
inline double dudley_bound(const PrecisionFactor& factor, const Site& x0, double gamma) {
  return dudley_integral(factor, x0, gamma).bound;
}

}  // namespace membrane
