#include <doctest.h>

#include <cmath>
#include <sstream>

#include "membrane/errors.hpp"
#include "membrane/operator.hpp"
#include "membrane/rng.hpp"

using namespace membrane;

namespace {

LatticeFunction random_function(const BoxDomain& dom, SeededStream& s) {
  LatticeFunction f(dom);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = s.normal();
  return f;
}

// Σ_{z in V_{N+1}} (Δu(z))², stencil applied to the zero extension site by site.
double brute_energy(const LatticeFunction& u) {
  const BoxDomain big = u.domain().enlarged();
  double e = 0.0;
  for (std::size_t i = 0; i < big.site_count(); ++i) {
    const Site z = big.site(i);
    double lap = 0.0;
    for (int a = 0; a < big.dim(); ++a) {
      Site p = z, m = z;
      ++p[a];
      --m[a];
      lap += u.extended(p) + u.extended(m) - 2.0 * u.extended(z);
    }
    e += lap * lap;
  }
  return e;
}

}  // namespace

TEST_CASE("laplacian of zero-extended functions") {
  LatticeFunction delta(BoxDomain(2, 0));
  delta[0] = 1.0;
  const LatticeFunction lap = laplacian_extended(delta);
  REQUIRE(lap.domain() == BoxDomain(2, 1));
  CHECK(lap.at({0, 0, 0}) == -4.0);
  for (Site s : {Site{1, 0, 0}, Site{-1, 0, 0}, Site{0, 1, 0}, Site{0, -1, 0}}) CHECK(lap.at(s) == 1.0);
  CHECK(lap.at({1, 1, 0}) == 0.0);

  const LatticeFunction zero = laplacian_extended(LatticeFunction(BoxDomain(3, 2)));
  for (double v : zero.values()) CHECK(v == 0.0);

  const BoxDomain dom(2, 2);
  LatticeFunction u(dom);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = dom.site(i)[0];
  const LatticeFunction lu = laplacian_extended(u);
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) CHECK(lu.at({a, b, 0}) == 0.0);
  CHECK(lu.at({2, 0, 0}) == -3.0);   // u(3,0) = 0 replaces 3
  CHECK(lu.at({3, 0, 0}) == 2.0);    // only u(2,0) survives
  CHECK(lu.at({-2, 1, 0}) == 3.0);
}

TEST_CASE("precision at a single site") {
  const PrecisionOperator q2 = assemble_precision(BoxDomain(2, 0));
  REQUIRE(q2.rows() == 1);
  CHECK(q2.entry(0, 0) == 20.0);
  CHECK(assemble_precision(BoxDomain(3, 0)).entry(0, 0) == 42.0);
  LatticeFunction f(BoxDomain(2, 0));
  f[0] = 1.0;
  CHECK(dirichlet_energy(f) == 20.0);
  CHECK(dirichlet_energy(LatticeFunction(BoxDomain(2, 3))) == 0.0);
}

TEST_CASE("energy identity against the brute-force stencil") {
  SeededStream s(7, 0);
  for (int n : {2, 3})
    for (int N : {1, 2, 3, n == 2 ? 8 : 4}) {
      const BoxDomain dom(n, N);
      const PrecisionOperator q = assemble_precision(dom);
      for (int t = 0; t < 10; ++t) {
        const LatticeFunction u = random_function(dom, s);
        const double brute = brute_energy(u);
        CHECK(std::abs(q.quadratic_form(u.values()) - brute) <= 1e-12 * brute);
        CHECK(std::abs(dirichlet_energy(u) - brute) <= 1e-12 * brute);
      }
    }
}

TEST_CASE("precision is exactly symmetric with a narrow stencil") {
  for (int n : {2, 3}) {
    const BoxDomain dom(n, 3);
    const PrecisionOperator q = assemble_precision(dom);
    const auto rs = q.row_start();
    const auto cols = q.columns();
    for (std::size_t i = 0; i < q.rows(); ++i)
      for (std::size_t k = rs[i]; k < rs[i + 1]; ++k) {
        const std::size_t j = cols[k];
        REQUIRE(q.entry(i, j) == q.entry(j, i));
        const Site x = dom.site(i), y = dom.site(j);
        int l1 = 0;
        for (int a = 0; a < n; ++a) l1 += std::abs(x[a] - y[a]);
        REQUIRE(l1 <= 2);
      }
  }
}

TEST_CASE("pairing is the polarized energy") {
  SeededStream s(11, 0);
  const BoxDomain dom(2, 2);
  const PrecisionOperator q = assemble_precision(dom);
  for (int t = 0; t < 5; ++t) {
    const LatticeFunction f = random_function(dom, s), g = random_function(dom, s);
    LatticeFunction sum(dom), diff(dom);
    for (std::size_t i = 0; i < f.size(); ++i) {
      sum[i] = f[i] + g[i];
      diff[i] = f[i] - g[i];
    }
    const double p = laplacian_pairing(f, g);
    CHECK(p == doctest::Approx(0.25 * (dirichlet_energy(sum) - dirichlet_energy(diff))).epsilon(1e-10));
    CHECK(p == doctest::Approx(q.bilinear_form(f.values(), g.values())).epsilon(1e-12));
    CHECK(laplacian_pairing(f, f) == doctest::Approx(dirichlet_energy(f)).epsilon(1e-14));
    CHECK(laplacian_pairing(f, LatticeFunction(dom)) == 0.0);
  }
  CHECK_THROWS_AS(laplacian_pairing(LatticeFunction(dom), LatticeFunction(BoxDomain(2, 3))), ContractError);
}

TEST_CASE("coordinate export") {
  const PrecisionOperator q = assemble_precision(BoxDomain(2, 1));
  std::stringstream out;
  write_coordinate(out, q);
  std::size_t rows = 0, nnz = 0;
  out >> rows >> nnz;
  CHECK(rows == 9);
  CHECK(nnz == q.nonzeros());
  std::size_t r = 0, c = 0;
  double v = 0;
  std::size_t lines = 0;
  while (out >> r >> c >> v) {
    CHECK(q.entry(r, c) == v);
    ++lines;
  }
  CHECK(lines == nnz);
}
