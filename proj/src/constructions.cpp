#include "membrane/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "membrane/errors.hpp"

namespace membrane {

double cutoff_eta(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

namespace {

int floor_log2(int v) {
  int k = 0;
  while ((2 << k) <= v) ++k;
  return k;
}

}  // namespace

ShiftFunction ShiftFunction::from_function(LatticeFunction f, std::string id, int inner_margin) {
  const double e = dirichlet_energy(f);
  return ShiftFunction{std::move(f), inner_margin, e, std::move(id)};
}

ShiftFunction shift_function(const BoxDomain& domain, int L) {
  const int N = domain.half_width();
  const int n = domain.dim();
  if (L < 0 || L > N) throw DomainError("shift_function: need 0 <= L <= N");
  const int k0 = floor_log2(L + 1);
  const int jmax = domain.max_annulus();
  LatticeFunction phi(domain);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const Site x = domain.site(i);
    double v = 0.0;
    for (int j = k0; j <= jmax; ++j) {
      const double scale = std::ldexp(1.0, j);
      double prod = std::exp2(j * (4 - n) / 2.0 + 1.0);
      for (int axis = 1; axis <= n; ++axis) prod *= cutoff_eta(domain.directional_distance(x, axis) / scale);
      v += prod;
    }
    phi[i] = v;
  }
  const double e = dirichlet_energy(phi);
  return ShiftFunction{std::move(phi), L, e, "phi(N=" + std::to_string(N) + ",L=" + std::to_string(L) + ")"};
}

double shift_energy_constant(int dim) { return dim == 2 ? 1000.0 : 1500.0; }

double shift_lower_bound_slack(const ShiftFunction& shift) {
  const BoxDomain& dom = shift.phi.domain();
  if (shift.inner_margin < 0) throw ContractError("shift_lower_bound_slack: shift carries no margin");
  const int n = dom.dim();
  double slack = INFINITY;
  for (const Site& x : inner_box(dom, dom.half_width() - shift.inner_margin)) {
    const double target = std::pow(static_cast<double>(dom.boundary_distance(x)), (4 - n) / 2.0);
    slack = std::min(slack, shift.phi.at(x) - target);
  }
  return slack;
}

CoveringSet covering_set(const BoxDomain& domain, int L, double gamma) {
  const int N = domain.half_width();
  const int n = domain.dim();
  if (!(gamma > 0.0 && gamma < 0.5)) throw DomainError("covering_set: gamma must lie in (0, 1/2)");
  if (L < 0 || L > N) throw DomainError("covering_set: need 0 <= L <= N");

  CoveringSet cover{SiteSet(domain), gamma, floor_log2(L + 1), {}};
  std::vector<Site> all;
  for (int k = cover.first_annulus; k <= domain.max_annulus(); ++k) {
    const int pitch = std::max(1, static_cast<int>(std::floor(gamma * std::ldexp(1.0, k))));
    const int outer = N + 1 - (1 << k);  // |c|_inf <= outer  <=>  d_N(c) >= 2^k
    const int inner = N + 1 - (2 << k);  // |c|_inf >  inner  <=>  d_N(c) <  2^{k+1}
    std::vector<Site> centers;
    for (const Site& x : dyadic_annulus(domain, k)) {
      Site c{0, 0, 0};
      int deepest = 0;
      for (int i = 0; i < n; ++i) {
        const int snapped = pitch * static_cast<int>(std::lround(static_cast<double>(x[i]) / pitch));
        c[i] = std::clamp(snapped, -outer, outer);
        if (std::abs(x[i]) > std::abs(x[deepest])) deepest = i;
      }
      // Too deep: pull the coordinate that puts x in the annulus back onto x.
      if (linf_distance(c, Site{0, 0, 0}, n) <= inner) c[deepest] = x[deepest];
      centers.push_back(c);
    }
    SiteSet layer(domain, std::move(centers));
    all.insert(all.end(), layer.begin(), layer.end());
    cover.per_annulus.push_back(std::move(layer));
  }
  cover.centers = SiteSet(domain, std::move(all));

  // Exhaustive coverage check of V_{N-L}.
  std::vector<char> covered(domain.site_count(), 0);
  for (const Site& c : cover.centers)
    for (const Site& y : cube_around(domain, c, gamma)) covered[domain.index(y)] = 1;
  for (const Site& x : inner_box(domain, N - L))
    if (!covered[domain.index(x)])
      throw InvariantViolation("covering_set: site " + to_string(x, n) + " not covered");
  return cover;
}

double covering_cardinality_constant(int dim) { return dim == 2 ? 36.0 : 40.0; }

SiteSet separated_boundary_sites(const BoxDomain& domain, int L, double alpha) {
  const int N = domain.half_width();
  const int n = domain.dim();
  if (!(alpha > 0.0)) throw DomainError("separated set: alpha must be positive");
  if (L < 0 || 2 * L > N) throw DomainError("separated set: need 0 <= L <= N/2");
  const int pitch = static_cast<int>(std::ceil(alpha * (L + 1)));
  const int reach = (N - L) / pitch;
  std::vector<Site> out;
  Site x{0, 0, 0};
  x[n - 1] = N - L;
  if (n == 2) {
    for (int a = -reach; a <= reach; ++a) {
      x[0] = a * pitch;
      out.push_back(x);
    }
  } else {
    for (int a = -reach; a <= reach; ++a)
      for (int b = -reach; b <= reach; ++b) {
        x[0] = a * pitch;
        x[1] = b * pitch;
        out.push_back(x);
      }
  }
  return SiteSet(domain, std::move(out));
}

std::size_t separated_set_size(int dim, int N, int L, double alpha) {
  const int pitch = static_cast<int>(std::ceil(alpha * (L + 1)));
  const std::size_t side = 2 * static_cast<std::size_t>((N - L) / pitch) + 1;
  return dim == 2 ? side : side * side;
}

SeparatedSet separated_boundary_set(const PrecisionFactor& factor, int L, double alpha) {
  SiteSet sites = separated_boundary_sites(factor.domain(), L, alpha);
  const std::size_t m = sites.size();
  const std::vector<double> g = greens_submatrix(factor, sites.sites());
  Eigen::MatrixXd sigma(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      sigma(a, b) = g[a * m + b] / std::sqrt(g[a * m + a] * g[b * m + b]);
  for (std::size_t a = 0; a < m; ++a) sigma(a, a) = 1.0;
  return SeparatedSet{std::move(sites), L, alpha, static_cast<int>(std::ceil(alpha * (L + 1))), std::move(sigma)};
}

double correlation_sum(const Eigen::MatrixXd& sigma) {
  double best = 0.0;
  for (Eigen::Index a = 0; a < sigma.rows(); ++a) {
    double s = 0.0;
    for (Eigen::Index b = 0; b < sigma.cols(); ++b)
      if (a != b) s += std::abs(sigma(a, b));
    best = std::max(best, s);
  }
  return best;
}

double correlation_sum(const SeparatedSet& set) { return correlation_sum(set.sigma_x); }

double choose_alpha(const PrecisionFactor& factor, int L) {
  for (double alpha = 1.0;; alpha *= 2.0) {
    const SeparatedSet set = separated_boundary_set(factor, L, alpha);
    if (correlation_sum(set) <= 0.25) return alpha;
    if (set.sites.size() == 1) throw InvariantViolation("choose_alpha: singleton set with nonzero correlation sum");
  }
}

LiShaoCertificate lishao_certificate(const Eigen::MatrixXd& sigma_x) {
  const Eigen::Index m = sigma_x.rows();
  LiShaoCertificate c;
  c.set_size = static_cast<std::size_t>(m);
  c.correlation_sum = correlation_sum(sigma_x);
  if (c.correlation_sum > 0.25)
    throw ContractError("lishao_certificate: correlation sum " + std::to_string(c.correlation_sum) + " > 1/4");

  // Σ_Y - Σ_X has diagonal 3/2 - Σ_X(x,x) and must dominate its off-diagonal row sums strictly.
  for (Eigen::Index a = 0; a < m; ++a) {
    double off = 0.0;
    for (Eigen::Index b = 0; b < m; ++b)
      if (a != b) off += std::abs(sigma_x(a, b));
    if (!(1.5 - sigma_x(a, a) > off))
      throw InvariantViolation("lishao_certificate: Σ_Y - Σ_X not strictly diagonally dominant");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_x, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = eig.eigenvalues().minCoeff();
  if (c.min_eigenvalue < 0.75 - 1e-9) throw InvariantViolation("lishao_certificate: eigenvalue of Σ_X below 3/4");

  const Eigen::LLT<Eigen::MatrixXd> llt(sigma_x);
  if (llt.info() != Eigen::Success) throw InvariantViolation("lishao_certificate: Σ_X not positive definite");
  c.log_det_sigma_x = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();

  const double e = static_cast<double>(m);
  c.log_bound = e * std::log(0.5) + 0.5 * (e * std::log(1.5) - c.log_det_sigma_x);
  c.coarse_log_bound = -0.5 * e * std::log(2.0);
  if (c.log_bound > c.coarse_log_bound + 1e-9 * std::max(1.0, e))
    throw InvariantViolation("lishao_certificate: bound exceeds (1/sqrt 2)^|E|");
  return c;
}

LiShaoCertificate lishao_certificate(const SeparatedSet& set) { return lishao_certificate(set.sigma_x); }

void write_certificate_header(std::ostream& out) {
  out << "n,N,L,alpha,set_size,corr_sum,min_eig_sigma_x,log2_upper_bound\n";
}

void write_certificate_row(std::ostream& out, int dim, int N, int L, double alpha, const LiShaoCertificate& c) {
  out << dim << ',' << N << ',' << L << ',' << alpha << ',' << c.set_size << std::setprecision(10) << ','
      << c.correlation_sum << ',' << c.min_eigenvalue << ',' << c.log_bound / std::log(2.0) << '\n';
}

std::size_t covering_number(std::size_t count, const Pseudometric& metric, double r) {
  if (!(r > 0.0)) throw DomainError("covering_number: radius must be positive");
  // near[c * count + p]: p lies in the open r-ball around c.
  std::vector<char> near(count * count);
  for (std::size_t c = 0; c < count; ++c)
    for (std::size_t p = 0; p < count; ++p) near[c * count + p] = (c == p) || metric(c, p) < r;
  std::vector<char> covered(count, 0);
  std::size_t left = count, balls = 0;
  while (left > 0) {
    // Uncovered centre whose ball takes the most uncovered points; lowest index on ties.
    std::size_t best = count, best_gain = 0;
    for (std::size_t c = 0; c < count; ++c) {
      if (covered[c]) continue;
      std::size_t gain = 0;
      for (std::size_t p = 0; p < count; ++p) gain += !covered[p] && near[c * count + p];
      if (gain > best_gain) {
        best = c;
        best_gain = gain;
      }
    }
    for (std::size_t p = 0; p < count; ++p)
      if (near[best * count + p] && !covered[p]) {
        covered[p] = 1;
        --left;
      }
    ++balls;
  }
  return balls;
}

std::size_t covering_number(const SiteSet& points, const std::function<double(const Site&, const Site&)>& metric,
                            double r) {
  const auto& s = points.sites();
  return covering_number(s.size(), [&](std::size_t a, std::size_t b) { return metric(s[a], s[b]); }, r);
}

namespace {

double dudley_trapezoid(std::size_t k, const std::vector<double>& dist, double r_min, double diameter,
                        std::size_t grid) {
  const Pseudometric metric = [&](std::size_t a, std::size_t b) { return dist[a * k + b]; };
  auto integrand = [&](double r) {
    return 24.0 * std::sqrt(std::log(static_cast<double>(covering_number(k, metric, r))));
  };
  const double ratio = diameter / r_min;
  double prev_r = r_min;
  double prev_f = integrand(r_min);
  double total = 0.0;
  for (std::size_t i = 1; i < grid; ++i) {
    const double r = (i + 1 == grid) ? diameter : r_min * std::pow(ratio, static_cast<double>(i) / (grid - 1));
    const double f = integrand(r);
    total += 0.5 * (r - prev_r) * (f + prev_f);
    prev_r = r;
    prev_f = f;
  }
  // [0, r_min]: the integrand never exceeds 24 sqrt(ln |A|).
  return total + r_min * 24.0 * std::sqrt(std::log(static_cast<double>(k)));
}

}  // namespace

DudleyResult dudley_integral(const PrecisionFactor& factor, const Site& x0, double gamma, std::size_t grid) {
  const SiteSet cube = cube_around(factor.domain(), x0, gamma);
  const std::size_t k = cube.size();
  DudleyResult res;
  res.points = k;
  if (k <= 1) return res;

  const std::vector<double> g = greens_submatrix(factor, cube.sites());
  std::vector<double> dist(k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      dist[a * k + b] = std::sqrt(std::max(0.0, g[a * k + a] + g[b * k + b] - 2.0 * g[a * k + b]));
      res.diameter = std::max(res.diameter, dist[a * k + b]);
    }
  if (res.diameter == 0.0) return res;

  grid = std::max<std::size_t>(grid, 4);
  const double r_min = res.diameter * std::ldexp(1.0, -20);
  res.bound = dudley_trapezoid(k, dist, r_min, res.diameter, grid);
  res.quadrature_error = std::abs(res.bound - dudley_trapezoid(k, dist, r_min, res.diameter, grid / 2));
  return res;
}

}  // namespace membrane
