#pragma once

#include <array>
#include <cstdint>

namespace membrane {

/// Standard normal CDF.
double normal_cdf(double x);
/// log Φ(x), accurate in the far lower tail.
double log_normal_cdf(double x);
/// Inverse standard normal CDF (Wichura AS241, relative accuracy ~1e-16); p in (0, 1).
double normal_quantile(double p);

namespace detail {
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);
}

/// Counter-based Philox4x32-10 stream keyed by (master seed, stream index).
///
/// Output depends only on (seed, stream, draw number), so work split into stream-indexed
/// blocks is reproducible regardless of how blocks are scheduled.
class SeededStream {
 public:
  SeededStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal by inversion.
  double normal() { return normal_quantile(uniform()); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int available_ = 0;
};

}  // namespace membrane
