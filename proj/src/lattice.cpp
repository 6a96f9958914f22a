#include "membrane/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "membrane/errors.hpp"

namespace membrane {

std::string to_string(const Site& x, int dim) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << x[i];
  os << ')';
  return os.str();
}

BoxDomain::BoxDomain(int dim, int half_width) : dim_(dim), half_width_(half_width) {
  if (dim != 2 && dim != 3) throw DomainError("dimension must be 2 or 3, got " + std::to_string(dim));
  if (half_width < 0) throw DomainError("half-width N must be nonnegative");
  site_count_ = 1;
  for (int i = 0; i < dim; ++i) site_count_ *= static_cast<std::size_t>(side());
}

bool BoxDomain::contains(const Site& x) const {
  for (int i = 0; i < dim_; ++i)
    if (std::abs(x[i]) > half_width_) return false;
  for (int i = dim_; i < 3; ++i)
    if (x[i] != 0) return false;
  return true;
}

std::size_t BoxDomain::index(const Site& x) const {
  if (!contains(x)) throw DomainError("site " + to_string(x, dim_) + " outside V_" + std::to_string(half_width_));
  std::size_t idx = 0;
  for (int i = 0; i < dim_; ++i) idx = idx * side() + static_cast<std::size_t>(x[i] + half_width_);
  return idx;
}

Site BoxDomain::site(std::size_t index) const {
  if (index >= site_count_) throw DomainError("site index out of range");
  Site x{0, 0, 0};
  for (int i = dim_ - 1; i >= 0; --i) {
    x[i] = static_cast<int>(index % side()) - half_width_;
    index /= side();
  }
  return x;
}

int BoxDomain::boundary_distance(const Site& x) const {
  if (!contains(x)) throw DomainError("boundary_distance: site " + to_string(x, dim_) + " outside V_N");
  int m = 0;
  for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(x[i]));
  return half_width_ + 1 - m;
}

int BoxDomain::directional_distance(const Site& x, int axis) const {
  if (axis < 1 || axis > dim_) throw DomainError("directional_distance: axis must be in 1..n");
  if (!contains(x)) throw DomainError("directional_distance: site outside V_N");
  return half_width_ + 1 - std::abs(x[axis - 1]);
}

int BoxDomain::max_annulus() const {
  int k = 0;
  while ((2 << k) <= half_width_ + 1) ++k;
  return k;
}

SiteSet::SiteSet(BoxDomain domain, std::vector<Site> sites) : domain_(domain), sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

bool SiteSet::contains(const Site& x) const { return std::binary_search(sites_.begin(), sites_.end(), x); }

std::vector<std::size_t> SiteSet::indices() const {
  std::vector<std::size_t> out;
  out.reserve(sites_.size());
  for (const auto& x : sites_) out.push_back(domain_.index(x));
  return out;
}

SiteSet dyadic_annulus(const BoxDomain& domain, int k) {
  if (k < 0 || k > domain.max_annulus())
    throw DomainError("dyadic_annulus: k=" + std::to_string(k) + " outside [0, " +
                      std::to_string(domain.max_annulus()) + "]");
  const int lo = 1 << k;
  const int hi = 2 << k;
  std::vector<Site> out;
  for (std::size_t i = 0; i < domain.site_count(); ++i) {
    const Site x = domain.site(i);
    const int d = domain.boundary_distance(x);
    if (d >= lo && d < hi) out.push_back(x);
  }
  return SiteSet(domain, std::move(out));
}

SiteSet cube_around(const BoxDomain& domain, const Site& x0, double gamma) {
  if (!(gamma > 0.0) || !(gamma < 0.5)) throw DomainError("cube_around: gamma must lie in (0, 1/2)");
  const double radius = gamma * domain.boundary_distance(x0);
  // Closed inequality against integer distances: |x - x0|_inf <= radius iff <= floor(radius).
  const int r = static_cast<int>(std::floor(radius));
  const int n = domain.dim();
  const int N = domain.half_width();
  std::vector<Site> out;
  Site lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < n; ++i) {
    lo[i] = std::max(-N, x0[i] - r);
    hi[i] = std::min(N, x0[i] + r);
  }
  Site x = lo;
  while (true) {
    out.push_back(x);
    int i = n - 1;
    while (i >= 0 && x[i] == hi[i]) {
      x[i] = lo[i];
      --i;
    }
    if (i < 0) break;
    ++x[i];
  }
  return SiteSet(domain, std::move(out));
}

SiteSet inner_box(const BoxDomain& domain, int radius) {
  if (radius < -1 || radius > domain.half_width()) throw DomainError("inner_box: radius outside [-1, N]");
  std::vector<Site> out;
  for (std::size_t i = 0; i < domain.site_count(); ++i) {
    const Site x = domain.site(i);
    if (domain.half_width() + 1 - domain.boundary_distance(x) <= radius) out.push_back(x);
  }
  return SiteSet(domain, std::move(out));
}

int linf_distance(const Site& a, const Site& b, int dim) {
  int m = 0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void write_site_set(std::ostream& out, const SiteSet& set) {
  const int n = set.domain().dim();
  out << n << ' ' << set.domain().half_width() << ' ' << set.size() << '\n';
  for (const auto& x : set) {
    for (int i = 0; i < n; ++i) out << (i ? " " : "") << x[i];
    out << '\n';
  }
}

SiteSet read_site_set(std::istream& in) {
  int n = 0, N = 0;
  std::size_t count = 0;
  if (!(in >> n >> N >> count)) throw std::runtime_error("site set: malformed header");
  BoxDomain domain(n, N);
  std::vector<Site> sites(count, Site{0, 0, 0});
  for (auto& x : sites)
    for (int i = 0; i < n; ++i)
      if (!(in >> x[i])) throw std::runtime_error("site set: truncated body");
  return SiteSet(domain, std::move(sites));
}

}  // namespace membrane
