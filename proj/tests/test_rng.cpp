#include <doctest.h>

#include <cmath>
#include <set>

#include "membrane/io.hpp"
#include "membrane/rng.hpp"

using namespace membrane;

TEST_CASE("philox known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(detail::philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(detail::philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(detail::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  SeededStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    seen.insert(x);
    seen.insert(c.next_u64());
    seen.insert(d.next_u64());
  }
  CHECK(seen.size() == 3000);
}

TEST_CASE("uniform and normal draws") {
  SeededStream s(1, 0);
  double sum = 0, sum2 = 0, lo = 1, hi = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sum2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("normal distribution functions") {
  for (double x : {-8.0, -3.0, -0.5, 0.0, 0.7, 2.5})
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_cdf(0.0) == 0.5);
  for (double x : {-4.0, -1.0, 0.0, 2.0}) CHECK(log_normal_cdf(x) == doctest::Approx(std::log(normal_cdf(x))));
  CHECK(log_normal_cdf(-10.0) == doctest::Approx(-53.23128515051247).epsilon(1e-12));
  CHECK(log_normal_cdf(-5.5) == doctest::Approx(-17.77937635262526).epsilon(1e-13));
  CHECK(log_normal_cdf(-30.0) == doctest::Approx(-454.3212439563432).epsilon(1e-13));
  CHECK(log_normal_cdf(-40.0) < log_normal_cdf(-39.0));
  CHECK(std::isfinite(log_normal_cdf(-60.0)));
}

TEST_CASE("hashing and number formatting") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(-INFINITY) == "-inf");
}
