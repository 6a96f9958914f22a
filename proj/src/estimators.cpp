#include "membrane/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "membrane/errors.hpp"
#include "membrane/parallel.hpp"
#include "membrane/sampler.hpp"

namespace membrane {

EventSpec EventSpec::positivity(SiteSet target, std::string label) {
  return EventSpec{Kind::positivity, std::move(target), std::move(label)};
}

EventSpec EventSpec::smallness(SiteSet target, std::string label) {
  return EventSpec{Kind::smallness, std::move(target), std::move(label)};
}

std::string EventSpec::describe() const {
  std::string s = kind == Kind::positivity ? "positivity" : "smallness";
  s += label.empty() ? "(|D|=" + std::to_string(target.size()) + ")" : "(" + label + ")";
  return s;
}

std::string to_string(Method m) { return m == Method::direct ? "direct" : "tilted"; }

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kBatch = 16;

// Indices and thresholds of an event, checked against V_N once.
struct CompiledEvent {
  EventSpec::Kind kind;
  std::vector<std::size_t> index;
  std::vector<double> bound;

  CompiledEvent(const EventSpec& e, const BoxDomain& dom) : kind(e.kind) {
    if (!(e.target.domain() == dom)) throw ContractError("event target lives on a different domain");
    index = e.target.indices();
    if (kind == EventSpec::Kind::smallness)
      for (const Site& x : e.target)
        bound.push_back(std::pow(static_cast<double>(dom.boundary_distance(x)), (4 - dom.dim()) / 2.0));
  }

  bool holds(std::span<const double> psi) const {
    if (kind == EventSpec::Kind::positivity) {
      for (std::size_t i : index)
        if (!(psi[i] >= 0.0)) return false;
      return true;
    }
    for (std::size_t k = 0; k < index.size(); ++k)
      if (!(std::abs(psi[index[k]]) <= bound[k])) return false;
    return true;
  }
};

// Running log Σ exp(v), merged deterministically.
struct LogSum {
  double max = kNegInf;
  double scaled = 0.0;

  void add(double v) {
    if (v == kNegInf) return;
    if (v > max) {
      scaled = scaled * std::exp(max - v) + 1.0;
      max = v;
    } else {
      scaled += std::exp(v - max);
    }
  }
  void merge(const LogSum& o) {
    if (o.max == kNegInf) return;
    if (o.max > max) {
      scaled = scaled * std::exp(max - o.max) + o.scaled;
      max = o.max;
    } else {
      scaled += o.scaled * std::exp(o.max - max);
    }
  }
  double value() const { return max == kNegInf ? kNegInf : max + std::log(scaled); }
};

// Runs `trials` samples of mean + centred field in stream-indexed blocks; visit(acc, psi) per sample.
template <class Acc, class Visit>
Acc run_blocks(const PrecisionFactor& factor, std::uint64_t trials, const McPlan& plan,
               std::span<const double> mean, Visit&& visit) {
  const std::size_t m = factor.size();
  const std::size_t block = std::max<std::size_t>(1, plan.block_size);
  const std::size_t blocks = static_cast<std::size_t>((trials + block - 1) / block);
  std::vector<Acc> parts(blocks);
  parallel_for(blocks, plan.workers, [&](std::size_t b) {
    SeededStream stream(plan.seed, plan.first_stream + b);
    const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(block, trials - b * block));
    Acc acc;
    std::vector<double> batch;
    std::vector<double> psi(m);
    for (std::size_t start = 0; start < count; start += kBatch) {
      const std::size_t c = std::min(kBatch, count - start);
      batch.resize(m * c);
      draw_centered_batch(factor, stream, c, batch);
      for (std::size_t r = 0; r < c; ++r) {
        for (std::size_t i = 0; i < m; ++i) psi[i] = batch[i * c + r] + (mean.empty() ? 0.0 : mean[i]);
        visit(acc, std::span<const double>(psi));
      }
    }
    parts[b] = std::move(acc);
  });
  Acc total;
  for (const Acc& p : parts) total.merge(p);
  return total;
}

struct HitCounter {
  std::uint64_t hits = 0;
  void merge(const HitCounter& o) { hits += o.hits; }
};

EstimateReport base_report(Method method, const EventSpec& event, std::uint64_t trials, const McPlan& plan) {
  EstimateReport r;
  r.method = method;
  r.event = event.describe();
  r.trials = trials;
  r.seed = plan.seed;
  r.first_stream = plan.first_stream;
  return r;
}

void check_trials(std::uint64_t trials) {
  if (trials < 1) throw ContractError("Monte Carlo: need at least one trial");
}

}  // namespace

bool event_holds(const EventSpec& event, const LatticeFunction& psi) {
  return CompiledEvent(event, psi.domain()).holds(psi.values());
}

EstimateReport direct_mc(const PrecisionFactor& factor, const EventSpec& event, std::uint64_t trials,
                         const McPlan& plan) {
  check_trials(trials);
  const CompiledEvent ev(event, factor.domain());
  EstimateReport r = base_report(Method::direct, event, trials, plan);
  if (ev.index.empty()) {
    r.hits = trials;
  } else {
    const HitCounter c = run_blocks<HitCounter>(factor, trials, plan, {}, [&](HitCounter& acc, auto psi) {
      if (ev.holds(psi)) ++acc.hits;
    });
    r.hits = c.hits;
  }
  const double t = static_cast<double>(trials);
  r.effective_sample_size = static_cast<double>(r.hits);
  // One-sided 95% Clopper-Pearson bound for zero hits: (1 - p)^T = 0.05.
  r.upper_bound_95 = -std::expm1(std::log(0.05) / t);
  if (r.hits == 0) {
    r.resolved = false;
    r.log_estimate = std::log(r.upper_bound_95);
    return r;
  }
  r.resolved = true;
  r.estimate = static_cast<double>(r.hits) / t;
  r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / t);
  r.log_estimate = std::log(r.estimate);
  r.log_std_error = r.std_error / r.estimate;
  return r;
}

double tilt_log_weight(std::span<const double> psi, std::span<const double> q_phi, double energy) {
  double pairing = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) pairing += psi[i] * q_phi[i];
  return -pairing + 0.5 * energy;
}

EstimateReport tilted_mc(const PrecisionFactor& factor, const EventSpec& event, const ShiftFunction& shift,
                         std::uint64_t trials, const McPlan& plan) {
  check_trials(trials);
  if (!(shift.phi.domain() == factor.domain())) throw ContractError("tilted_mc: shift on a different domain");
  const CompiledEvent ev(event, factor.domain());
  // The likelihood ratio uses the sampled law's own precision, so synthetic factors stay exact;
  // for the membrane precision φᵀQφ = ‖Δφ‖².
  const std::vector<double> q_phi = factor.cholesky().multiply(shift.phi.values());
  double energy = 0.0;
  for (std::size_t i = 0; i < q_phi.size(); ++i) energy += shift.phi[i] * q_phi[i];

  struct Acc {
    std::uint64_t hits = 0;
    LogSum w;
    LogSum w2;
    void merge(const Acc& o) {
      hits += o.hits;
      w.merge(o.w);
      w2.merge(o.w2);
    }
  };
  const Acc acc = run_blocks<Acc>(factor, trials, plan, shift.phi.values(), [&](Acc& a, auto psi) {
    if (!ev.holds(psi)) return;
    const double lw = tilt_log_weight(psi, q_phi, energy);
    if (!std::isfinite(lw)) throw InvariantViolation("tilted_mc: non-finite importance weight");
    ++a.hits;
    a.w.add(lw);
    a.w2.add(2.0 * lw);
  });

  EstimateReport r = base_report(Method::tilted, event, trials, plan);
  r.hits = acc.hits;
  r.shift_energy = energy;
  r.shift_id = shift.id;
  r.upper_bound_95 = std::numeric_limits<double>::quiet_NaN();
  if (acc.hits == 0) {
    r.resolved = false;
    r.log_estimate = kNegInf;
    return r;
  }
  const double log_t = std::log(static_cast<double>(trials));
  const double log_sum = acc.w.value();
  const double log_sum2 = acc.w2.value();
  r.resolved = true;
  r.log_estimate = log_sum - log_t;
  r.estimate = std::exp(r.log_estimate);
  r.effective_sample_size = std::exp(2.0 * log_sum - log_sum2);
  // Var of a single term = E[(1w)²] - p², computed relative to the second moment.
  const double log_m2 = log_sum2 - log_t;
  const double rel = std::exp(2.0 * r.log_estimate - log_m2);  // p² / m2 in [0, 1]
  const double t = static_cast<double>(trials);
  if (trials > 1 && rel < 1.0) {
    const double log_var = log_m2 + std::log1p(-rel) + std::log(t / (t - 1.0));
    const double log_se = 0.5 * (log_var - log_t);
    r.std_error = std::exp(log_se);
    r.log_std_error = std::exp(log_se - r.log_estimate);
  }
  return r;
}

EstimateReport smallness_probability(const PrecisionFactor& factor, int L, std::uint64_t trials, const McPlan& plan) {
  const BoxDomain& dom = factor.domain();
  if (L < 0 || L > dom.half_width()) throw DomainError("smallness_probability: need 0 <= L <= N");
  return direct_mc(factor, EventSpec::smallness(inner_box(dom, dom.half_width() - L), "V_{N-" + std::to_string(L) + "}"),
                   trials, plan);
}

EstimateReport local_smallness_probability(const PrecisionFactor& factor, const Site& x0, double gamma,
                                           std::uint64_t trials, const McPlan& plan) {
  const BoxDomain& dom = factor.domain();
  return direct_mc(factor, EventSpec::smallness(cube_around(dom, x0, gamma), "A" + to_string(x0, dom.dim())), trials,
                   plan);
}

GciVerdict gci_check(const PrecisionFactor& factor, const EventSpec& k, const EventSpec& l, std::uint64_t trials,
                     const McPlan& plan) {
  if (k.kind != EventSpec::Kind::smallness || l.kind != EventSpec::Kind::smallness)
    throw ContractError("gci_check: both events must be symmetric convex (smallness) events");
  check_trials(trials);
  const CompiledEvent ek(k, factor.domain());
  const CompiledEvent el(l, factor.domain());
  struct Acc {
    std::uint64_t nk = 0, nl = 0, nkl = 0;
    void merge(const Acc& o) {
      nk += o.nk;
      nl += o.nl;
      nkl += o.nkl;
    }
  };
  const Acc a = run_blocks<Acc>(factor, trials, plan, {}, [&](Acc& acc, auto psi) {
    const bool hk = ek.holds(psi);
    const bool hl = el.holds(psi);
    acc.nk += hk;
    acc.nl += hl;
    acc.nkl += hk && hl;
  });
  const double t = static_cast<double>(trials);
  GciVerdict v;
  v.p_k = a.nk / t;
  v.p_l = a.nl / t;
  v.p_kl = a.nkl / t;
  // Delta method on p_kl - p_k p_l. The variance uses the 2x2 cell frequencies with half a pseudo-count per
  // cell: with an empty cell the plug-in variance collapses far below the one-count resolution 1/T.
  const double n_kl = a.nkl + 0.5, n_k_only = (a.nk - a.nkl) + 0.5, n_l_only = (a.nl - a.nkl) + 0.5;
  const double n_none = (t - a.nk - a.nl + a.nkl) + 0.5;
  const double total = n_kl + n_k_only + n_l_only + n_none;
  const double qkl = n_kl / total, qk = (n_kl + n_k_only) / total, ql = (n_kl + n_l_only) / total;
  const double var = qkl * (1 - qkl) + ql * ql * qk * (1 - qk) + qk * qk * ql * (1 - ql) -
                     2 * ql * qkl * (1 - qk) - 2 * qk * qkl * (1 - ql) + 2 * qk * ql * (qkl - qk * ql);
  v.std_error = std::sqrt(std::max(0.0, var) / t);
  v.pass = v.p_kl >= v.p_k * v.p_l - 3.0 * v.std_error;
  return v;
}

ConditionalMaxReport conditional_max(const PrecisionFactor& factor, const EventSpec& condition, std::uint64_t trials,
                                     const McPlan& plan) {
  check_trials(trials);
  const CompiledEvent ev(condition, factor.domain());
  const BoxDomain& dom = factor.domain();
  const double scale = std::pow(static_cast<double>(std::max(1, dom.half_width())), -(4 - dom.dim()) / 2.0);
  struct Acc {
    std::uint64_t accepted = 0;
    double s = 0, s2 = 0, cs = 0, cs2 = 0;
    void merge(const Acc& o) {
      accepted += o.accepted;
      s += o.s;
      s2 += o.s2;
      cs += o.cs;
      cs2 += o.cs2;
    }
  };
  const Acc a = run_blocks<Acc>(factor, trials, plan, {}, [&](Acc& acc, auto psi) {
    const double mx = scale * *std::max_element(psi.begin(), psi.end());
    acc.s += mx;
    acc.s2 += mx * mx;
    if (ev.holds(psi)) {
      ++acc.accepted;
      acc.cs += mx;
      acc.cs2 += mx * mx;
    }
  });
  auto summarize = [](double s, double s2, double n, double& mean, double& se) {
    mean = s / n;
    se = n > 1 ? std::sqrt(std::max(0.0, (s2 / n - mean * mean) * n / (n - 1)) / n) : 0.0;
  };
  ConditionalMaxReport r;
  r.trials = trials;
  r.accepted = a.accepted;
  r.acceptance_rate = static_cast<double>(a.accepted) / static_cast<double>(trials);
  summarize(a.s, a.s2, static_cast<double>(trials), r.unconditional_mean, r.unconditional_std_error);
  if (a.accepted > 0)
    summarize(a.cs, a.cs2, static_cast<double>(a.accepted), r.conditional_mean, r.conditional_std_error);
  r.feasible = a.accepted > 0 && r.acceptance_rate >= 1e-3;
  return r;
}

MeanEstimate expected_supremum(const PrecisionFactor& factor, const SiteSet& set, std::uint64_t trials,
                               const McPlan& plan) {
  check_trials(trials);
  if (set.empty()) throw ContractError("expected_supremum: empty set");
  const std::vector<std::size_t> idx = set.indices();
  struct Acc {
    double s = 0, s2 = 0;
    void merge(const Acc& o) {
      s += o.s;
      s2 += o.s2;
    }
  };
  const Acc a = run_blocks<Acc>(factor, trials, plan, {}, [&](Acc& acc, auto psi) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i : idx) mx = std::max(mx, psi[i]);
    acc.s += mx;
    acc.s2 += mx * mx;
  });
  const double n = static_cast<double>(trials);
  MeanEstimate e;
  e.mean = a.s / n;
  e.std_error = n > 1 ? std::sqrt(std::max(0.0, (a.s2 / n - e.mean * e.mean) * n / (n - 1)) / n) : 0.0;
  return e;
}

ScalingFit scaling_fit(int dim, const std::vector<ScalingPoint>& points) {
  if (points.size() < 3) throw ContractError("scaling_fit: need at least 3 points");
  std::vector<double> s, y;
  for (const auto& p : points) {
    s.push_back(std::pow(static_cast<double>(p.N) / (p.L + 1), dim - 1));
    y.push_back(p.log_probability);
  }
  const double n = static_cast<double>(s.size());
  double ms = 0, my = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ms += s[i];
    my += y[i];
  }
  ms /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sxx += (s[i] - ms) * (s[i] - ms);
    sxy += (s[i] - ms) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 1e-12 * std::max(1.0, ms * ms))) throw ContractError("scaling_fit: degenerate design (all s equal)");
  ScalingFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * ms;
  double sse = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * s[i];
    sse += e * e;
  }
  f.r_squared = syy > 0 ? 1.0 - sse / syy : 0.0;
  f.slope_std_error = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  f.pass = f.slope < 0.0 && f.r_squared >= 0.9;
  return f;
}

LiShaoMcVerdict lishao_mc_check(const Eigen::MatrixXd& sigma_x, const Eigen::MatrixXd& sigma_y,
                                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, std::uint64_t trials,
                                const McPlan& plan) {
  check_trials(trials);
  const Eigen::Index m = sigma_x.rows();
  if (sigma_y.rows() != m || lower.size() != m || upper.size() != m)
    throw ContractError("lishao_mc_check: dimension mismatch");
  const Eigen::LLT<Eigen::MatrixXd> lx(sigma_x), ly(sigma_y);
  if (lx.info() != Eigen::Success || ly.info() != Eigen::Success)
    throw ContractError("lishao_mc_check: covariances must be positive definite");
  const Eigen::MatrixXd cx = lx.matrixL();
  const Eigen::MatrixXd cy = ly.matrixL();
  auto inside = [&](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < m; ++i)
      if (v(i) < lower(i) || v(i) > upper(i)) return false;
    return true;
  };
  const std::size_t block = std::max<std::size_t>(1, plan.block_size);
  const std::size_t blocks = static_cast<std::size_t>((trials + block - 1) / block);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> parts(blocks);
  parallel_for(blocks, plan.workers, [&](std::size_t b) {
    SeededStream stream(plan.seed, plan.first_stream + b);
    const std::uint64_t count = std::min<std::uint64_t>(block, trials - b * block);
    Eigen::VectorXd z(m);
    std::uint64_t hx = 0, hy = 0;
    for (std::uint64_t t = 0; t < count; ++t) {
      for (Eigen::Index i = 0; i < m; ++i) z(i) = stream.normal();
      hx += inside(cx * z);
      for (Eigen::Index i = 0; i < m; ++i) z(i) = stream.normal();
      hy += inside(cy * z);
    }
    parts[b] = {hx, hy};
  });
  std::uint64_t hx = 0, hy = 0;
  for (const auto& [a, b] : parts) {
    hx += a;
    hy += b;
  }
  const double t = static_cast<double>(trials);
  LiShaoMcVerdict v;
  v.p_x = hx / t;
  v.p_y = hy / t;
  v.det_ratio_sqrt = std::exp(0.5 * (2.0 * Eigen::MatrixXd(cx).diagonal().array().log().sum() -
                                     2.0 * Eigen::MatrixXd(cy).diagonal().array().log().sum()));
  const double var = v.p_y * (1 - v.p_y) / t + v.det_ratio_sqrt * v.det_ratio_sqrt * v.p_x * (1 - v.p_x) / t;
  v.std_error = std::sqrt(var);
  v.pass = v.p_y >= v.det_ratio_sqrt * v.p_x - 3.0 * v.std_error;
  return v;
}

std::string EstimateReport::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["method"] = to_string(method);
  j["event"] = event;
  j["trials"] = trials;
  j["seed"] = seed;
  j["first_stream"] = first_stream;
  j["hits"] = hits;
  j["resolved"] = resolved;
  j["estimate"] = num(estimate);
  j["std_error"] = num(std_error);
  j["log_estimate"] = num(log_estimate);
  j["log_std_error"] = num(log_std_error);
  j["upper_bound_95"] = num(upper_bound_95);
  j["effective_sample_size"] = num(effective_sample_size);
  if (method == Method::tilted) {
    j["shift_energy"] = num(shift_energy);
    j["shift_id"] = shift_id;
  }
  return j.dump(2);
}

}  // namespace membrane
