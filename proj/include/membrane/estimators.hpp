#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "membrane/constructions.hpp"
#include "membrane/greens.hpp"
#include "membrane/lattice.hpp"

namespace membrane {

/// Positivity: ψ_x >= 0 on D. Uniform smallness: |ψ_x| <= d_N(x)^{(4-n)/2} on D.
struct EventSpec {
  enum class Kind { positivity, smallness };

  Kind kind = Kind::positivity;
  SiteSet target;
  std::string label;

  static EventSpec positivity(SiteSet target, std::string label = {});
  static EventSpec smallness(SiteSet target, std::string label = {});
  std::string describe() const;
};

/// Indicator of the event for one field on the event's domain.
bool event_holds(const EventSpec& event, const LatticeFunction& psi);

/// How Monte Carlo work is split: block b uses SeededStream(seed, first_stream + b). Blocks
/// are merged in index order, so results do not depend on `workers`.
struct McPlan {
  std::uint64_t seed = 1;
  std::uint64_t first_stream = 0;
  std::size_t block_size = 512;
  unsigned workers = 1;
};

enum class Method { direct, tilted };
std::string to_string(Method m);

struct EstimateReport {
  Method method = Method::direct;
  std::string event;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t first_stream = 0;
  std::uint64_t hits = 0;
  bool resolved = false;      // false: zero hits; the point estimate is unavailable
  double estimate = 0.0;      // probability; may underflow to 0 for tilted runs, use log_estimate
  double std_error = 0.0;
  double log_estimate = 0.0;  // direct + unresolved: log of the one-sided 95% upper bound; tilted + unresolved: -inf
  double log_std_error = 0.0; // delta method, std_error / estimate
  double upper_bound_95 = 0.0;
  double effective_sample_size = 0.0;
  double shift_energy = 0.0;  // ‖Δφ‖² of the tilt (tilted only)
  std::string shift_id;

  std::string to_json() const;
};

EstimateReport direct_mc(const PrecisionFactor& factor, const EventSpec& event, std::uint64_t trials,
                         const McPlan& plan);

/// Samples ψ = φ + centred field and weights hits by the exact likelihood ratio
/// w(ψ) = exp(-(Δφ, Δψ) + ½‖Δφ‖²). No self-normalisation.
EstimateReport tilted_mc(const PrecisionFactor& factor, const EventSpec& event, const ShiftFunction& shift,
                         std::uint64_t trials, const McPlan& plan);

/// log w for one sample ψ of the shifted field, with Qφ and ‖Δφ‖² precomputed.
double tilt_log_weight(std::span<const double> psi, std::span<const double> q_phi, double energy);

/// Direct MC of |ψ_x| <= d_N(x)^{(4-n)/2} on V_{N-L}.
EstimateReport smallness_probability(const PrecisionFactor& factor, int L, std::uint64_t trials, const McPlan& plan);

/// Direct MC of the same event on A_{x0,γ}.
EstimateReport local_smallness_probability(const PrecisionFactor& factor, const Site& x0, double gamma,
                                           std::uint64_t trials, const McPlan& plan);

struct GciVerdict {
  double p_k = 0.0;
  double p_l = 0.0;
  double p_kl = 0.0;
  double std_error = 0.0;  // of p_kl - p_k p_l; delta method on half-count-smoothed cell frequencies
  bool pass = false;
};

/// Paired-sample check of P(K ∩ L) >= P(K) P(L) - 3 se. Both events must be smallness events.
GciVerdict gci_check(const PrecisionFactor& factor, const EventSpec& k, const EventSpec& l, std::uint64_t trials,
                     const McPlan& plan);

struct ConditionalMaxReport {
  bool feasible = false;  // accepted > 0 and acceptance rate >= 1e-3
  std::uint64_t trials = 0;
  std::uint64_t accepted = 0;
  double acceptance_rate = 0.0;
  double conditional_mean = 0.0;  // E(N^{-(4-n)/2} max ψ | condition)
  double conditional_std_error = 0.0;
  double unconditional_mean = 0.0;
  double unconditional_std_error = 0.0;
};

/// Rejection sampling of the scaled maximum over V_N given the condition event.
ConditionalMaxReport conditional_max(const PrecisionFactor& factor, const EventSpec& condition, std::uint64_t trials,
                                     const McPlan& plan);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo E sup_{x in A} ψ_x.
MeanEstimate expected_supremum(const PrecisionFactor& factor, const SiteSet& set, std::uint64_t trials,
                               const McPlan& plan);

struct ScalingPoint {
  int N = 0;
  int L = 0;
  double log_probability = 0.0;
};

struct ScalingFit {
  double slope = 0.0;  // -ĉ
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_std_error = 0.0;
  bool pass = false;  // slope < 0 and R² >= 0.9
};

/// OLS of log-probability on s = N^{n-1} / (L+1)^{n-1}. Needs >= 3 points and a nondegenerate design.
ScalingFit scaling_fit(int dim, const std::vector<ScalingPoint>& points);

struct LiShaoMcVerdict {
  double p_y = 0.0;
  double p_x = 0.0;
  double det_ratio_sqrt = 0.0;  // (det Σ_X / det Σ_Y)^{1/2}
  double std_error = 0.0;       // of p_y - ratio p_x
  bool pass = false;
};

/// MC check of P(Y in F) >= (det Σ_X / det Σ_Y)^{1/2} P(X in F) - 3 se for a rectangle F.
LiShaoMcVerdict lishao_mc_check(const Eigen::MatrixXd& sigma_x, const Eigen::MatrixXd& sigma_y,
                                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, std::uint64_t trials,
                                const McPlan& plan);

}  // namespace membrane
