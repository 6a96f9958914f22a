#pragma once

#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "membrane/errors.hpp"
#include "membrane/greens.hpp"
#include "membrane/operator.hpp"
#include "membrane/rng.hpp"

namespace membrane {

template <class S>
concept NormalSource = requires(S& s) {
  { s.normal() } -> std::convertible_to<double>;
};

/// One realization of the field plus where it came from.
struct FieldSample {
  LatticeFunction psi;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string mean_id;  // empty for a centred field
};

/// Writes ψ = L⁻ᵀ z into `out`, z drawn i.i.d. standard normal from `source`.
/// Cov(ψ) = (L Lᵀ)⁻¹ = Q⁻¹ = G_N.
template <NormalSource Source>
void draw_centered(const PrecisionFactor& factor, Source& source, std::span<double> out) {
  for (double& v : out) v = source.normal();
  factor.cholesky().solve_upper(out);
}

/// Draws `count` centred fields at once into `out`, interleaved: site i of field r at out[i * count + r].
/// Field r consumes the same normals, in the same order, as the r-th call of draw_centered would.
template <NormalSource Source>
void draw_centered_batch(const PrecisionFactor& factor, Source& source, std::size_t count, std::span<double> out) {
  const std::size_t m = factor.size();
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t i = 0; i < m; ++i) out[i * count + r] = source.normal();
  factor.cholesky().solve_upper_multi(out, count);
}

/// ψ = mean + L⁻ᵀ z. Throws ContractError if `mean` lives on another domain.
template <NormalSource Source>
LatticeFunction sample_field(const PrecisionFactor& factor, Source& source, const LatticeFunction* mean = nullptr) {
  if (mean && !(mean->domain() == factor.domain())) throw ContractError("sample: mean on a different domain");
  LatticeFunction psi(factor.domain());
  draw_centered(factor, source, psi.values());
  if (mean)
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += (*mean)[i];
  return psi;
}

FieldSample sample(const PrecisionFactor& factor, SeededStream& stream, const LatticeFunction* mean = nullptr,
                   std::string mean_id = {});

struct CovarianceEstimate {
  Site x{};
  Site y{};
  double covariance = 0.0;  // unbiased
  double std_error = 0.0;
};

/// Unbiased sample covariance of (ψ_x, ψ_y) for each requested pair. Needs >= 2 samples.
std::vector<CovarianceEstimate> empirical_covariance(const std::vector<FieldSample>& samples,
                                                     const std::vector<std::pair<Site, Site>>& pairs);

/// Text dump, header "n N seed stream", then one value per line in index order. The reader skips leading "#" lines.
void write_sample(std::ostream& out, const FieldSample& s);
FieldSample read_sample(std::istream& in);

}  // namespace membrane
