#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "membrane/errors.hpp"
#include "membrane/estimators.hpp"
#include "membrane/rng.hpp"
#include "membrane/sampler.hpp"

using namespace membrane;

namespace {

PrecisionFactor membrane_factor(int n, int N) { return factorize(assemble_precision(BoxDomain(n, N))); }

// Diagonal precision on V_N: independent coordinates with variance 1/d.
PrecisionFactor diagonal_factor(const BoxDomain& dom, double d) {
  const std::size_t m = dom.site_count();
  std::vector<std::size_t> rs(m + 1), cols(m);
  for (std::size_t i = 0; i <= m; ++i) rs[i] = i;
  for (std::size_t i = 0; i < m; ++i) cols[i] = i;
  return factorize(PrecisionOperator::from_csr(dom, rs, cols, std::vector<double>(m, d)));
}

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

TEST_CASE("direct Monte Carlo") {
  const PrecisionFactor f0 = membrane_factor(2, 0);
  const EstimateReport half = direct_mc(f0, EventSpec::positivity(inner_box(f0.domain(), 0)), 100000, McPlan{});
  CHECK(half.resolved);
  CHECK(std::abs(half.estimate - 0.5) <= 5.0 * half.std_error);
  CHECK(half.log_estimate == doctest::Approx(std::log(static_cast<double>(half.hits) / 100000.0)).epsilon(1e-15));
  CHECK(half.log_std_error >= 0.0);

  const PrecisionFactor f8 = membrane_factor(2, 8);
  const EstimateReport all = direct_mc(f8, EventSpec::positivity(inner_box(f8.domain(), 8)), 10000, McPlan{});
  CHECK(all.estimate <= 0.5 + 3.0 * all.std_error);
  CHECK_FALSE(all.resolved);
  CHECK(all.upper_bound_95 == doctest::Approx(1.0 - std::pow(0.05, 1e-4)).epsilon(1e-12));
  CHECK(all.log_estimate == doctest::Approx(std::log(all.upper_bound_95)));

  const EstimateReport empty = direct_mc(f8, EventSpec::positivity(SiteSet(f8.domain())), 10, McPlan{});
  CHECK(empty.estimate == 1.0);
  CHECK(empty.log_estimate == 0.0);

  CHECK_THROWS_AS(direct_mc(f8, EventSpec::positivity(inner_box(f8.domain(), 1)), 0, McPlan{}), ContractError);
  CHECK_THROWS_AS(direct_mc(f8, EventSpec::positivity(inner_box(f0.domain(), 0)), 10, McPlan{}), ContractError);
}

TEST_CASE("results do not depend on the worker count") {
  const PrecisionFactor f = membrane_factor(2, 4);
  const EventSpec ev = EventSpec::smallness(inner_box(f.domain(), 3));
  const EstimateReport a = direct_mc(f, ev, 5000, McPlan{5, 0, 300, 1});
  const EstimateReport b = direct_mc(f, ev, 5000, McPlan{5, 0, 300, 3});
  CHECK(a.to_json() == b.to_json());
  const ShiftFunction s = shift_function(f.domain(), 2);
  const EventSpec pos = EventSpec::positivity(inner_box(f.domain(), 2));
  CHECK(tilted_mc(f, pos, s, 3000, McPlan{5, 0, 256, 1}).to_json() ==
        tilted_mc(f, pos, s, 3000, McPlan{5, 0, 256, 4}).to_json());
}

TEST_CASE("tilted Monte Carlo") {
  const PrecisionFactor f = membrane_factor(2, 4);
  const BoxDomain& dom = f.domain();
  const EventSpec ev = EventSpec::positivity(inner_box(dom, 4));

  SUBCASE("zero shift reproduces the direct estimator") {
    const ShiftFunction zero = ShiftFunction::from_function(LatticeFunction(dom), "zero");
    const EventSpec small = EventSpec::positivity(inner_box(dom, 1));
    const EstimateReport d = direct_mc(f, small, 20000, McPlan{8});
    const EstimateReport t = tilted_mc(f, small, zero, 20000, McPlan{8});
    CHECK(t.hits == d.hits);
    CHECK(t.estimate == doctest::Approx(d.estimate).epsilon(1e-12));
    CHECK(t.effective_sample_size == doctest::Approx(static_cast<double>(d.hits)).epsilon(1e-9));
  }

  SUBCASE("weight identity") {
    const ShiftFunction phi = shift_function(dom, 0);
    const std::vector<double> q_phi = assemble_precision(dom).apply(phi.phi.values());
    SeededStream s(12, 0);
    for (int t = 0; t < 20; ++t) {
      const LatticeFunction psi = sample_field(f, s, &phi.phi);
      LatticeFunction centred(dom);
      for (std::size_t i = 0; i < psi.size(); ++i) centred[i] = psi[i] - phi.phi[i];
      const double lw = tilt_log_weight(psi.values(), q_phi, phi.energy);
      // w is the density ratio dP / dP_φ.
      const double residual = lw - 0.5 * dirichlet_energy(centred) + 0.5 * dirichlet_energy(psi);
      CHECK(std::abs(residual) <= 1e-8 * std::max(1.0, dirichlet_energy(psi)));
    }
  }

  SUBCASE("agrees with the direct estimator under a moderate tilt") {
    const ShiftFunction base = shift_function(dom, 0);
    LatticeFunction scaled(dom);
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = base.phi[i] * std::sqrt(8.0 / base.energy);
    const ShiftFunction tilt = ShiftFunction::from_function(scaled, "phi(N=4,L=0) at energy 8");
    CHECK(tilt.energy == doctest::Approx(8.0).epsilon(1e-12));
    const EstimateReport d = direct_mc(f, ev, 1000000, McPlan{2, 0, 4096});
    const EstimateReport t = tilted_mc(f, ev, tilt, 100000, McPlan{3, 0, 4096});
    REQUIRE(d.resolved);
    REQUIRE(t.resolved);
    CHECK(std::abs(t.estimate - d.estimate) <= 3.0 * combined(t.std_error, d.std_error));
    CHECK(t.effective_sample_size > 100.0);
    CHECK(t.shift_energy == doctest::Approx(8.0).epsilon(1e-9));
  }

  SUBCASE("shift on another domain is rejected") {
    const ShiftFunction other = shift_function(BoxDomain(2, 3), 0);
    CHECK_THROWS_AS(tilted_mc(f, ev, other, 10, McPlan{}), ContractError);
  }
}

TEST_CASE("event structure") {
  const PrecisionFactor f = membrane_factor(2, 4);
  const BoxDomain& dom = f.domain();
  const EstimateReport inner = direct_mc(f, EventSpec::positivity(inner_box(dom, 1)), 20000, McPlan{4});
  const EstimateReport outer = direct_mc(f, EventSpec::positivity(inner_box(dom, 2)), 20000, McPlan{4});
  CHECK(inner.hits >= outer.hits);

  const EventSpec small = EventSpec::smallness(inner_box(dom, 4));
  SeededStream s(6, 0);
  for (int t = 0; t < 200; ++t) {
    LatticeFunction psi = sample_field(f, s);
    const bool plus = event_holds(small, psi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = -psi[i];
    REQUIRE(event_holds(small, psi) == plus);
  }
}

TEST_CASE("smallness probabilities") {
  const PrecisionFactor f0 = membrane_factor(2, 0);
  const EstimateReport r0 = smallness_probability(f0, 0, 100000, McPlan{});
  const double exact0 = 2.0 * normal_cdf(1.0 / std::sqrt(0.05)) - 1.0;
  CHECK(std::abs(r0.estimate - exact0) <= 5.0 * std::max(r0.std_error, 1.0 / 100000.0));

  const PrecisionFactor f8 = membrane_factor(2, 8);
  const EstimateReport corner = local_smallness_probability(f8, {8, 8, 0}, 0.25, 100000, McPlan{});
  const double g = greens_column(f8, {8, 8, 0}).values.at({8, 8, 0});
  const double exact = 2.0 * normal_cdf(1.0 / std::sqrt(g)) - 1.0;
  CHECK(std::abs(corner.estimate - exact) <= 5.0 * corner.std_error);

  CHECK(smallness_probability(f8, 0, 10000, McPlan{}).hits > 0);
  const PrecisionFactor f16 = membrane_factor(2, 16);
  const EstimateReport l0 = smallness_probability(f16, 0, 10000, McPlan{});
  const EstimateReport l3 = smallness_probability(f16, 3, 10000, McPlan{});
  CHECK(l0.hits > 0);
  CHECK(l3.estimate >= l0.estimate - 3.0 * combined(l0.std_error, l3.std_error));
  CHECK_THROWS_AS(smallness_probability(f16, 17, 10, McPlan{}), DomainError);

  double lowest = 1.0;
  for (Site x0 : {Site{0, 0, 0}, Site{0, 8, 0}, Site{14, 14, 0}}) {
    const EstimateReport wide = local_smallness_probability(f16, x0, 0.25, 20000, McPlan{});
    const EstimateReport narrow = local_smallness_probability(f16, x0, 0.1, 20000, McPlan{});
    CHECK(narrow.estimate >= wide.estimate - 3.0 * combined(wide.std_error, narrow.std_error));
    lowest = std::min(lowest, wide.estimate);
  }
  CHECK(lowest > 0.05);
}

TEST_CASE("Gaussian correlation check") {
  const PrecisionFactor f = membrane_factor(2, 8);
  const EventSpec k = EventSpec::smallness(cube_around(f.domain(), {0, 0, 0}, 0.25));
  const GciVerdict same = gci_check(f, k, k, 20000, McPlan{});
  CHECK(same.pass);
  CHECK(same.p_kl == same.p_k);

  const EventSpec l = EventSpec::smallness(cube_around(f.domain(), {4, 0, 0}, 0.25));
  CHECK(gci_check(f, k, l, 20000, McPlan{}).pass);
  CHECK_THROWS_AS(gci_check(f, EventSpec::positivity(k.target), l, 10, McPlan{}), ContractError);

  const BoxDomain dom(2, 1);
  const PrecisionFactor diag = diagonal_factor(dom, 4.0);
  const EventSpec a = EventSpec::smallness(SiteSet(dom, {{0, 0, 0}}));
  const EventSpec b = EventSpec::smallness(SiteSet(dom, {{1, 1, 0}, {-1, 0, 0}}));
  const GciVerdict ind = gci_check(diag, a, b, 100000, McPlan{});
  CHECK(std::abs(ind.p_kl - ind.p_k * ind.p_l) <= 4.0 * ind.std_error);
}

TEST_CASE("conditional maximum") {
  const PrecisionFactor f = membrane_factor(2, 8);
  const ConditionalMaxReport free = conditional_max(f, EventSpec::positivity(SiteSet(f.domain())), 5000, McPlan{});
  CHECK(free.feasible);
  CHECK(free.accepted == 5000);
  CHECK(free.unconditional_mean > 0.0);
  CHECK(free.conditional_mean == doctest::Approx(free.unconditional_mean).epsilon(1e-12));

  const ConditionalMaxReport none = conditional_max(f, EventSpec::positivity(inner_box(f.domain(), 8)), 200, McPlan{});
  CHECK_FALSE(none.feasible);
  CHECK(none.accepted == 0);
}

TEST_CASE("scaling fit") {
  std::vector<ScalingPoint> exact;
  for (int N : {4, 8, 16, 32}) exact.push_back({N, 0, -0.7 * N});
  const ScalingFit e = scaling_fit(2, exact);
  CHECK(e.slope == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(e.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.pass);

  SeededStream s(21, 0);
  std::vector<ScalingPoint> noisy;
  for (int N = 2; N <= 40; N += 2) noisy.push_back({N, 0, -0.7 * N + 0.1 * s.normal()});
  const ScalingFit nf = scaling_fit(2, noisy);
  CHECK(std::abs(nf.slope + 0.7) <= 3.0 * nf.slope_std_error);

  std::vector<ScalingPoint> flat;
  for (int N : {4, 8, 16}) flat.push_back({N, 0, -3.0});
  const ScalingFit ff = scaling_fit(2, flat);
  CHECK(ff.slope == doctest::Approx(0.0));
  CHECK_FALSE(ff.pass);

  CHECK_THROWS_AS(scaling_fit(2, {{8, 0, -1.0}, {16, 0, -2.0}}), ContractError);
  CHECK_THROWS_AS(scaling_fit(2, {{8, 0, -1.0}, {8, 0, -2.0}, {8, 0, -1.5}}), ContractError);
  // s = N/(L+1) is what enters, so (16, 1) and (8, 0) coincide.
  CHECK_THROWS_AS(scaling_fit(2, {{8, 0, -1.0}, {16, 1, -2.0}, {24, 2, -1.5}}), ContractError);
}

TEST_CASE("Li-Shao Monte Carlo check") {
  Eigen::MatrixXd sx(2, 2);
  sx << 1.0, 0.3, 0.3, 1.0;
  const Eigen::MatrixXd sy = sx + 0.5 * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -0.5), hi = Eigen::VectorXd::Constant(2, 1.0);
  const LiShaoMcVerdict v = lishao_mc_check(sx, sy, lo, hi, 20000, McPlan{});
  CHECK(v.pass);
  CHECK(v.det_ratio_sqrt == doctest::Approx(std::sqrt(sx.determinant() / sy.determinant())).epsilon(1e-12));
}

TEST_CASE("report serialization") {
  const PrecisionFactor f = membrane_factor(2, 8);
  const EstimateReport r = direct_mc(f, EventSpec::positivity(inner_box(f.domain(), 8), "V_8"), 100, McPlan{});
  const nlohmann::json j = nlohmann::json::parse(r.to_json());
  CHECK(j["method"] == "direct");
  CHECK(j["event"] == "positivity(V_8)");
  CHECK(j["trials"] == 100);
  CHECK(j["resolved"] == false);
  CHECK(j.contains("upper_bound_95"));
  CHECK_FALSE(j.contains("shift_id"));
}
