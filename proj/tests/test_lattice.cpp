#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "membrane/errors.hpp"
#include "membrane/lattice.hpp"

using namespace membrane;

namespace {

// dist_inf from x to the nearest site outside V_N, searched over a box one layer past the shell.
int brute_boundary_distance(const BoxDomain& dom, const Site& x) {
  const int R = dom.half_width() + 2;
  int best = 1 << 30;
  Site z{0, 0, 0};
  const int n = dom.dim();
  for (z[0] = -R; z[0] <= R; ++z[0])
    for (z[1] = -R; z[1] <= R; ++z[1])
      for (z[2] = (n == 3 ? -R : 0); z[2] <= (n == 3 ? R : 0); ++z[2])
        if (!dom.contains(z)) best = std::min(best, linf_distance(x, z, n));
  return best;
}

}  // namespace

TEST_CASE("box domain construction and indexing") {
  CHECK_THROWS_AS(BoxDomain(4, 3), DomainError);
  CHECK_THROWS_AS(BoxDomain(1, 3), DomainError);
  CHECK_THROWS_AS(BoxDomain(2, -1), DomainError);

  for (int n : {2, 3})
    for (int N : {0, 1, 3}) {
      const BoxDomain dom(n, N);
      std::size_t expected = 1;
      for (int i = 0; i < n; ++i) expected *= static_cast<std::size_t>(2 * N + 1);
      REQUIRE(dom.site_count() == expected);
      for (std::size_t i = 0; i < dom.site_count(); ++i) CHECK(dom.index(dom.site(i)) == i);
    }

  const BoxDomain dom(2, 2);
  CHECK(dom.site(0) == Site{-2, -2, 0});
  CHECK(dom.site(1) == Site{-2, -1, 0});
  CHECK_THROWS_AS(dom.index(Site{3, 0, 0}), DomainError);
}

TEST_CASE("boundary distance") {
  CHECK(BoxDomain(2, 5).boundary_distance({0, 0, 0}) == 6);
  CHECK(BoxDomain(2, 5).boundary_distance({5, 3, 0}) == 1);
  CHECK(BoxDomain(3, 4).boundary_distance({2, -1, 0}) == 3);
  CHECK_THROWS_AS(BoxDomain(2, 5).boundary_distance({6, 0, 0}), DomainError);

  for (int N = 0; N <= 16; ++N) {
    const BoxDomain dom(2, N);
    for (std::size_t i = 0; i < dom.site_count(); ++i) {
      const Site x = dom.site(i);
      REQUIRE(dom.boundary_distance(x) == brute_boundary_distance(dom, x));
    }
  }
  for (int N = 0; N <= 4; ++N) {
    const BoxDomain dom(3, N);
    for (std::size_t i = 0; i < dom.site_count(); ++i) {
      const Site x = dom.site(i);
      REQUIRE(dom.boundary_distance(x) == brute_boundary_distance(dom, x));
    }
  }
}

TEST_CASE("directional distance") {
  const BoxDomain dom(2, 5);
  CHECK(dom.directional_distance({3, -5, 0}, 1) == 3);
  CHECK(dom.directional_distance({3, -5, 0}, 2) == 1);
  for (int i = 1; i <= 3; ++i) CHECK(BoxDomain(3, 2).directional_distance({0, 0, 0}, i) == 3);
  CHECK_THROWS_AS(dom.directional_distance({0, 0, 0}, 0), DomainError);
  CHECK_THROWS_AS(dom.directional_distance({0, 0, 0}, 3), DomainError);
}

TEST_CASE("dyadic annuli") {
  const BoxDomain dom(2, 3);
  CHECK(dyadic_annulus(dom, 0).size() == 24);
  CHECK(dyadic_annulus(dom, 1).size() == 24);
  const SiteSet top = dyadic_annulus(dom, 2);
  REQUIRE(top.size() == 1);
  CHECK(*top.begin() == Site{0, 0, 0});
  CHECK_THROWS_AS(dyadic_annulus(dom, 3), DomainError);
  CHECK_THROWS_AS(dyadic_annulus(dom, -1), DomainError);

  auto check_partition = [](const BoxDomain& d) {
    std::vector<int> seen(d.site_count(), 0);
    for (int k = 0; k <= d.max_annulus(); ++k)
      for (const Site& x : dyadic_annulus(d, k)) {
        const int dist = d.boundary_distance(x);
        REQUIRE(dist >= (1 << k));
        REQUIRE(dist < (2 << k));
        ++seen[d.index(x)];
      }
    REQUIRE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  };
  for (int N = 0; N <= 32; ++N) check_partition(BoxDomain(2, N));
  for (int N = 0; N <= 8; ++N) check_partition(BoxDomain(3, N));
}

TEST_CASE("cubes around a site") {
  const BoxDomain dom(2, 8);
  const SiteSet c = cube_around(dom, {0, 0, 0}, 0.25);
  CHECK(c.size() == 25);
  for (const Site& x : c) CHECK(linf_distance(x, {0, 0, 0}, 2) <= 2);

  const SiteSet corner = cube_around(dom, {8, 8, 0}, 0.25);
  REQUIRE(corner.size() == 1);
  CHECK(*corner.begin() == Site{8, 8, 0});
  CHECK(cube_around(dom, {0, 0, 0}, 0.1).size() == 1);

  CHECK_THROWS_AS(cube_around(dom, {0, 0, 0}, 0.5), DomainError);
  CHECK_THROWS_AS(cube_around(dom, {0, 0, 0}, 0.0), DomainError);
  CHECK_THROWS_AS(cube_around(dom, {9, 0, 0}, 0.25), DomainError);

  for (int N = 0; N <= 16; ++N) {
    const BoxDomain d(2, N);
    for (double gamma : {0.1, 0.25, 0.49})
      for (std::size_t i = 0; i < d.site_count(); ++i) {
        const Site x0 = d.site(i);
        const int d0 = d.boundary_distance(x0);
        const SiteSet cube = cube_around(d, x0, gamma);
        REQUIRE(cube.contains(x0));
        for (const Site& x : cube) {
          REQUIRE(2 * d.boundary_distance(x) >= d0);
          REQUIRE(2 * d.boundary_distance(x) <= 3 * d0);
        }
      }
  }
}

TEST_CASE("site sets") {
  const BoxDomain dom(2, 2);
  const SiteSet s(dom, {{1, 1, 0}, {-1, 0, 0}, {1, 1, 0}});
  REQUIRE(s.size() == 2);
  CHECK(*s.begin() == Site{-1, 0, 0});
  CHECK(s.contains({1, 1, 0}));
  CHECK_FALSE(s.contains({0, 0, 0}));
  CHECK(inner_box(dom, -1).empty());
  CHECK(inner_box(dom, 1).size() == 9);

  std::stringstream io;
  write_site_set(io, s);
  CHECK(io.str().rfind("2 2 2\n", 0) == 0);
  const SiteSet back = read_site_set(io);
  CHECK(back.sites() == s.sites());
  CHECK(back.domain() == dom);
}
