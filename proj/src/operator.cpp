#include "membrane/operator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <utility>

#include "membrane/errors.hpp"

namespace membrane {

LatticeFunction::LatticeFunction(BoxDomain domain, std::vector<double> values)
    : domain_(domain), values_(std::move(values)) {
  if (values_.size() != domain_.site_count()) throw ContractError("LatticeFunction: value count != site count");
}

namespace {

// Column of A for source site x: (target site in V_{N+1}, weight) pairs of the (2n+1)-point stencil.
template <class Fn>
void for_each_stencil_target(const Site& x, int dim, Fn&& fn) {
  fn(x, -2.0 * dim);
  for (int i = 0; i < dim; ++i) {
    Site y = x;
    y[i] += 1;
    fn(y, 1.0);
    y[i] -= 2;
    fn(y, 1.0);
  }
}

}  // namespace

LatticeFunction laplacian_extended(const LatticeFunction& u) {
  const BoxDomain& dom = u.domain();
  const BoxDomain big = dom.enlarged();
  LatticeFunction out(big);
  for (std::size_t i = 0; i < dom.site_count(); ++i) {
    const double v = u[i];
    if (v == 0.0) continue;
    for_each_stencil_target(dom.site(i), dom.dim(), [&](const Site& z, double w) { out[big.index(z)] += w * v; });
  }
  return out;
}

double dirichlet_energy(const LatticeFunction& f) {
  const LatticeFunction lap = laplacian_extended(f);
  double s = 0.0;
  for (double v : lap.values()) s += v * v;
  return s;
}

double laplacian_pairing(const LatticeFunction& f, const LatticeFunction& g) {
  if (!(f.domain() == g.domain())) throw ContractError("laplacian_pairing: domain mismatch");
  const LatticeFunction a = laplacian_extended(f);
  const LatticeFunction b = laplacian_extended(g);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

PrecisionOperator assemble_precision(const BoxDomain& domain) {
  const BoxDomain big = domain.enlarged();
  // Rows of A, i.e. for each target z in V_{N+1} the V_N sources hitting it.
  std::vector<std::vector<std::pair<std::size_t, double>>> hits(big.site_count());
  for (std::size_t i = 0; i < domain.site_count(); ++i)
    for_each_stencil_target(domain.site(i), domain.dim(),
                            [&](const Site& z, double w) { hits[big.index(z)].emplace_back(i, w); });

  std::vector<std::vector<std::pair<std::size_t, double>>> rows(domain.site_count());
  for (const auto& h : hits)
    for (const auto& [xi, wx] : h)
      for (const auto& [yi, wy] : h) rows[xi].emplace_back(yi, wx * wy);

  PrecisionOperator q(domain);
  q.row_start_.assign(1, 0);
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t r = q.row_start_.size() - 1;
    for (std::size_t k = 0; k < row.size();) {
      const std::size_t col = row[k].first;
      double v = 0.0;
      for (; k < row.size() && row[k].first == col; ++k) v += row[k].second;
      if (v == 0.0) continue;
      q.columns_.push_back(col);
      q.values_.push_back(v);
      q.bandwidth_ = std::max(q.bandwidth_, col > r ? col - r : r - col);
    }
    q.row_start_.push_back(q.columns_.size());
  }
  return q;
}

PrecisionOperator PrecisionOperator::from_csr(BoxDomain domain, std::vector<std::size_t> row_start,
                                              std::vector<std::size_t> columns, std::vector<double> values) {
  if (row_start.size() != domain.site_count() + 1 || columns.size() != values.size() ||
      row_start.back() != columns.size())
    throw ContractError("from_csr: inconsistent CSR arrays");
  PrecisionOperator q(domain);
  q.row_start_ = std::move(row_start);
  q.columns_ = std::move(columns);
  q.values_ = std::move(values);
  for (std::size_t r = 0; r + 1 < q.row_start_.size(); ++r)
    for (std::size_t k = q.row_start_[r]; k < q.row_start_[r + 1]; ++k) {
      const std::size_t c = q.columns_[k];
      if (c >= q.rows()) throw ContractError("from_csr: column out of range");
      q.bandwidth_ = std::max(q.bandwidth_, c > r ? c - r : r - c);
      if (q.entry(c, r) != q.values_[k]) throw ContractError("from_csr: matrix not symmetric");
    }
  return q;
}

double PrecisionOperator::entry(std::size_t i, std::size_t j) const {
  const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(row_start_[i]);
  const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(row_start_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? values_[static_cast<std::size_t>(it - columns_.begin())] : 0.0;
}

void PrecisionOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != rows() || y.size() != rows()) throw ContractError("PrecisionOperator::apply: size mismatch");
  for (std::size_t r = 0; r < rows(); ++r) {
    double s = 0.0;
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) s += values_[k] * x[columns_[k]];
    y[r] = s;
  }
}

std::vector<double> PrecisionOperator::apply(std::span<const double> x) const {
  std::vector<double> y(rows());
  apply(x, y);
  return y;
}

double PrecisionOperator::bilinear_form(std::span<const double> x, std::span<const double> y) const {
  const std::vector<double> qy = apply(y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * qy[i];
  return s;
}

double PrecisionOperator::quadratic_form(std::span<const double> x) const { return bilinear_form(x, x); }

void write_coordinate(std::ostream& out, const PrecisionOperator& q) {
  out << q.rows() << ' ' << q.nonzeros() << '\n';
  out << std::setprecision(17);
  for (std::size_t r = 0; r < q.rows(); ++r)
    for (std::size_t k = q.row_start()[r]; k < q.row_start()[r + 1]; ++k)
      out << r << ' ' << q.columns()[k] << ' ' << q.values()[k] << '\n';
}

}  // namespace membrane
