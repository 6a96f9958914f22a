#include "membrane/sampler.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

#include "membrane/errors.hpp"

namespace membrane {

FieldSample sample(const PrecisionFactor& factor, SeededStream& stream, const LatticeFunction* mean,
                   std::string mean_id) {
  return FieldSample{sample_field(factor, stream, mean), stream.seed(), stream.stream(),
                     mean ? std::move(mean_id) : std::string{}};
}

std::vector<CovarianceEstimate> empirical_covariance(const std::vector<FieldSample>& samples,
                                                     const std::vector<std::pair<Site, Site>>& pairs) {
  if (samples.size() < 2) throw ContractError("empirical_covariance: need at least 2 samples");
  const BoxDomain& dom = samples.front().psi.domain();
  for (const auto& s : samples)
    if (!(s.psi.domain() == dom)) throw ContractError("empirical_covariance: samples on different domains");

  const double n = static_cast<double>(samples.size());
  std::vector<CovarianceEstimate> out;
  out.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    const std::size_t ix = dom.index(x);
    const std::size_t iy = dom.index(y);
    double mx = 0.0, my = 0.0;
    for (const auto& s : samples) {
      mx += s.psi[ix];
      my += s.psi[iy];
    }
    mx /= n;
    my /= n;
    double sum = 0.0, sum2 = 0.0;
    for (const auto& s : samples) {
      const double p = (s.psi[ix] - mx) * (s.psi[iy] - my);
      sum += p;
      sum2 += p * p;
    }
    const double cov = sum / (n - 1.0);
    // Standard error from the spread of the centred products.
    const double mean_p = sum / n;
    const double var_p = std::max(0.0, (sum2 / n - mean_p * mean_p) * n / (n - 1.0));
    out.push_back({x, y, cov, std::sqrt(var_p / n)});
  }
  return out;
}

void write_sample(std::ostream& out, const FieldSample& s) {
  const BoxDomain& dom = s.psi.domain();
  out << dom.dim() << ' ' << dom.half_width() << ' ' << s.seed << ' ' << s.stream << '\n';
  out << std::setprecision(17);
  for (double v : s.psi.values()) out << v << '\n';
}

FieldSample read_sample(std::istream& in) {
  int n = 0, N = 0;
  FieldSample s{LatticeFunction(BoxDomain(2, 0)), 0, 0, {}};
  while ((in >> std::ws).peek() == '#') in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  if (!(in >> n >> N >> s.seed >> s.stream)) throw std::runtime_error("sample dump: malformed header");
  LatticeFunction psi{BoxDomain(n, N)};
  for (double& v : psi.values())
    if (!(in >> v)) throw std::runtime_error("sample dump: truncated body");
  s.psi = std::move(psi);
  return s;
}

}  // namespace membrane
