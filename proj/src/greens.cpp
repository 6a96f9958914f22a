#include "membrane/greens.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "membrane/errors.hpp"
#include "membrane/parallel.hpp"

namespace membrane {

PrecisionFactor::PrecisionFactor(const PrecisionOperator& q) : domain_(q.domain()), chol_(q) {}

PrecisionFactor factorize(const PrecisionOperator& q) { return PrecisionFactor(q); }

GreensColumn greens_column(const PrecisionFactor& factor, const Site& y) {
  const std::size_t j = factor.domain().index(y);
  LatticeFunction g(factor.domain());
  g[j] = 1.0;
  factor.cholesky().solve(g.values());
  return GreensColumn{y, std::move(g)};
}

LatticeFunction variance_profile(const PrecisionFactor& factor) {
  LatticeFunction out(factor.domain());
  std::vector<double> work;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = factor.cholesky().inverse_diagonal(j, work);
  return out;
}

std::vector<double> greens_matrix(const PrecisionFactor& factor, unsigned workers) {
  const std::size_t m = factor.size();
  std::vector<double> g(m * m, 0.0);
  parallel_for(m, workers, [&](std::size_t j) {
    std::span<double> col(g.data() + j * m, m);
    col[j] = 1.0;
    factor.cholesky().solve(col);
  });
  // Columns were written as rows; G is symmetric up to rounding, so symmetrize explicitly.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = 0.5 * (g[i * m + j] + g[j * m + i]);
      g[i * m + j] = v;
      g[j * m + i] = v;
    }
  return g;
}

std::vector<double> greens_submatrix(const PrecisionFactor& factor, const std::vector<Site>& sites) {
  const std::size_t k = sites.size();
  std::vector<double> out(k * k);
  std::vector<double> col(factor.size());
  for (std::size_t b = 0; b < k; ++b) {
    std::fill(col.begin(), col.end(), 0.0);
    col[factor.domain().index(sites[b])] = 1.0;
    factor.cholesky().solve(col);
    for (std::size_t a = 0; a < k; ++a) out[a * k + b] = col[factor.domain().index(sites[a])];
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      const double v = 0.5 * (out[a * k + b] + out[b * k + a]);
      out[a * k + b] = out[b * k + a] = v;
    }
  return out;
}

BoundConstants fit_bound_constants(const PrecisionFactor& factor, unsigned workers) {
  const BoxDomain& dom = factor.domain();
  const int n = dom.dim();
  const std::size_t m = dom.site_count();
  const std::vector<double> g = greens_matrix(factor, workers);

  std::vector<Site> sites(m);
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i) {
    sites[i] = dom.site(i);
    d[i] = dom.boundary_distance(sites[i]);
  }

  BoundConstants c;
  c.dim = n;
  c.half_width = dom.half_width();
  c.c1 = INFINITY;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = g[i * m + i] / std::pow(d[i], 4 - n);
    c.c1 = std::min(c.c1, r);
    c.C1 = std::max(c.C1, r);
    for (int axis = 0; axis < n; ++axis)
      for (int step : {-1, 1}) {
        Site y = sites[i];
        y[axis] += step;
        // G_N(x, y) = 0 for y outside V_N.
        const double gxy = dom.contains(y) ? g[i * m + dom.index(y)] : 0.0;
        c.C2 = std::max(c.C2, std::abs(g[i * m + i] - gxy) / std::pow(d[i], 3 - n));
      }
  }

  std::vector<double> row_max(m, 0.0);
  parallel_for(m, workers, [&](std::size_t i) {
    double best = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double sep = linf_distance(sites[i], sites[j], n) + 1.0;
      const double v = std::abs(g[i * m + j]) * std::pow(sep, n) / (d[i] * d[i] * d[j] * d[j]);
      best = std::max(best, v);
    }
    row_max[i] = best;
  });
  c.C4 = *std::max_element(row_max.begin(), row_max.end());
  return c;
}

double max_constant_ratio(const BoundConstants& a, const BoundConstants& b) {
  auto ratio = [](double x, double y) { return std::max(x, y) / std::min(x, y); };
  return std::max({ratio(a.c1, b.c1), ratio(a.C1, b.C1), ratio(a.C2, b.C2), ratio(a.C4, b.C4)});
}

void write_constants_header(std::ostream& out) { out << "n,N,c1,C1,C2,C4\n"; }

void write_constants_row(std::ostream& out, const BoundConstants& c) {
  out << c.dim << ',' << c.half_width << std::setprecision(10) << ',' << c.c1 << ',' << c.C1 << ',' << c.C2 << ','
      << c.C4 << '\n';
}

}  // namespace membrane
