#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace membrane {

/// Lattice point of Z^n, n <= 3. Unused trailing coordinates stay 0.
using Site = std::array<int, 3>;

std::string to_string(const Site& x, int dim);

/// Box V_N = [-N, N]^n ∩ Z^n with row-major dense indexing (last coordinate fastest).
class BoxDomain {
 public:
  BoxDomain(int dim, int half_width);

  int dim() const { return dim_; }
  int half_width() const { return half_width_; }
  int side() const { return 2 * half_width_ + 1; }
  std::size_t site_count() const { return site_count_; }

  bool contains(const Site& x) const;
  std::size_t index(const Site& x) const;  // throws DomainError outside V_N
  Site site(std::size_t index) const;

  /// d_N(x) = N + 1 - |x|_inf, the l-inf distance to Z^n \ V_N.
  int boundary_distance(const Site& x) const;
  /// d_i(x) = N + 1 - |x_i|; axis is 1-based.
  int directional_distance(const Site& x, int axis) const;

  /// Largest k with W_{N,k} nonempty, floor(log2(N + 1)).
  int max_annulus() const;

  /// Same dimension, half-width N + 1. Supports Δψ for ψ supported in V_N.
  BoxDomain enlarged() const { return BoxDomain(dim_, half_width_ + 1); }

  friend bool operator==(const BoxDomain&, const BoxDomain&) = default;

 private:
  int dim_;
  int half_width_;
  std::size_t site_count_;
};

/// Sorted, duplicate-free list of sites attached to a domain.
class SiteSet {
 public:
  explicit SiteSet(BoxDomain domain) : domain_(domain) {}
  SiteSet(BoxDomain domain, std::vector<Site> sites);

  const BoxDomain& domain() const { return domain_; }
  const std::vector<Site>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  bool contains(const Site& x) const;

  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }

  /// Dense indices into the domain; every member must lie in V_N.
  std::vector<std::size_t> indices() const;

 private:
  BoxDomain domain_;
  std::vector<Site> sites_;
};

/// W_{N,k} = {x in V_N : 2^k <= d_N(x) < 2^{k+1}}, 0 <= k <= max_annulus().
SiteSet dyadic_annulus(const BoxDomain& domain, int k);

/// A_{x0,gamma} = {x in V_N : |x - x0|_inf <= gamma d_N(x0)}, 0 < gamma < 1/2.
SiteSet cube_around(const BoxDomain& domain, const Site& x0, double gamma);

/// V_R = {x : |x|_inf <= R} viewed inside V_N; R must satisfy -1 <= R <= N (R = -1 gives the empty set).
SiteSet inner_box(const BoxDomain& domain, int radius);

int linf_distance(const Site& a, const Site& b, int dim);

/// Text format: header "n N count", then one site per line.
void write_site_set(std::ostream& out, const SiteSet& set);
SiteSet read_site_set(std::istream& in);

}  // namespace membrane
