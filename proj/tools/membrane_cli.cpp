#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "membrane/constructions.hpp"
#include "membrane/errors.hpp"
#include "membrane/estimators.hpp"
#include "membrane/greens.hpp"
#include "membrane/io.hpp"
#include "membrane/operator.hpp"
#include "membrane/sampler.hpp"

namespace membrane::cli {
namespace {

enum Exit : int { kPass = 0, kFail = 1, kIo = 2, kInfeasible = 3, kUsage = 64 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

// Buffers a file in memory and writes it at commit(); output either appears whole or raises IoError.
class OutputFile {
 public:
  OutputFile(const ExperimentConfig& c, const std::string& command, std::string name)
      : path_(std::filesystem::path(c.out) / std::move(name)) {
    write_provenance(body_, c.hash(command), c.seed);
  }
  std::ostream& stream() { return body_; }
  void commit() { write_file(path_, body_.str()); }

 private:
  std::filesystem::path path_;
  std::ostringstream body_;
};

McPlan plan_of(const ExperimentConfig& c) {
  return McPlan{c.seed, c.first_stream, c.block_size, c.workers};
}

PrecisionFactor build_factor(int dim, int N) { return factorize(assemble_precision(BoxDomain(dim, N))); }

std::string point_tag(int dim, int N, int L) {
  return "n" + std::to_string(dim) + "_N" + std::to_string(N) + "_L" + std::to_string(L);
}

EventSpec event_of(const ExperimentConfig& c, const BoxDomain& dom, int L) {
  SiteSet target = inner_box(dom, dom.half_width() - L);
  const std::string label = "V_" + std::to_string(dom.half_width() - L);
  return c.event == "positivity" ? EventSpec::positivity(std::move(target), label)
                                 : EventSpec::smallness(std::move(target), label);
}

int cmd_greens_validate(const ExperimentConfig& c) {
  const std::string cmd = "greens-validate";
  OutputFile csv(c, cmd, "constants.csv");
  write_constants_header(csv.stream());
  bool ok = true;
  std::optional<BoundConstants> previous;
  for (int N : c.sizes) {
    const PrecisionFactor factor = build_factor(c.dim, N);
    const BoundConstants k = fit_bound_constants(factor, c.workers);
    write_constants_row(csv.stream(), k);

    bool row_ok = std::isfinite(k.c1) && k.c1 > 0 && std::isfinite(k.C1) && k.C1 > 0 && std::isfinite(k.C2) &&
                  k.C2 > 0 && std::isfinite(k.C4) && k.C4 > 0;
    // Symmetry on deterministic site pairs.
    SeededStream pick(c.seed, c.first_stream);
    const BoxDomain& dom = factor.domain();
    for (int t = 0; t < 8; ++t) {
      const Site x = dom.site(pick.next_u64() % dom.site_count());
      const Site y = dom.site(pick.next_u64() % dom.site_count());
      const double gxy = greens_column(factor, y).values.at(x);
      const double gyx = greens_column(factor, x).values.at(y);
      if (!(std::abs(gxy - gyx) <= 1e-9 * std::max(1.0, std::abs(gxy)))) row_ok = false;
    }
    double ratio = 1.0;
    if (previous) ratio = max_constant_ratio(*previous, k);
    if (ratio > 2.0) row_ok = false;
    ok = ok && row_ok;
    std::cout << "greens n=" << c.dim << " N=" << N << " c1=" << format_double(k.c1) << " C1=" << format_double(k.C1)
              << " C2=" << format_double(k.C2) << " C4=" << format_double(k.C4)
              << " ratio_vs_previous=" << format_double(ratio) << (row_ok ? " ok" : " FAIL") << '\n';
    previous = k;
  }
  csv.commit();
  return ok ? kPass : kFail;
}

int cmd_sample(const ExperimentConfig& c) {
  const std::string cmd = "sample";
  const int N = c.sizes.front();
  const int L = c.margins.front();
  if (L > N) throw UsageError("sample: L > N");
  const PrecisionFactor factor = build_factor(c.dim, N);
  std::optional<ShiftFunction> shift;
  if (c.shift == "phi") shift = shift_function(factor.domain(), L);
  for (std::uint64_t k = 0; k < c.count; ++k) {
    SeededStream stream(c.seed, c.first_stream + k);
    const FieldSample s = sample(factor, stream, shift ? &shift->phi : nullptr, shift ? shift->id : std::string{});
    OutputFile file(c, cmd, "sample_" + point_tag(c.dim, N, L) + "_" + std::to_string(k) + ".txt");
    if (!s.mean_id.empty()) file.stream() << "# mean=" << s.mean_id << '\n';
    write_sample(file.stream(), s);
    file.commit();
  }
  std::cout << "wrote " << c.count << " field(s) on V_" << N << " (n=" << c.dim << ")\n";
  return kPass;
}

std::string report_json(const ExperimentConfig& c, const std::string& cmd, const EstimateReport& r, int N, int L) {
  nlohmann::json j;
  j["config_hash"] = hex64(c.hash(cmd));
  j["seed"] = c.seed;
  j["n"] = c.dim;
  j["N"] = N;
  j["L"] = L;
  j["report"] = nlohmann::json::parse(r.to_json());
  return j.dump(2) + "\n";
}

void write_report_row(std::ostream& out, int dim, int N, int L, const EstimateReport& r) {
  out << dim << ',' << N << ',' << L << ',' << to_string(r.method) << ',' << r.trials << ',' << r.hits << ','
      << (r.resolved ? 1 : 0) << ',' << format_double(r.log_estimate) << ',' << format_double(r.log_std_error) << ','
      << format_double(r.upper_bound_95) << ',' << format_double(r.effective_sample_size) << ','
      << format_double(r.shift_energy) << '\n';
}
constexpr const char* kReportHeader =
    "n,N,L,method,trials,hits,resolved,log_estimate,log_std_error,upper_bound_95,effective_sample_size,shift_energy\n";

EstimateReport run_point(const ExperimentConfig& c, const PrecisionFactor& factor, int L) {
  const EventSpec event = event_of(c, factor.domain(), L);
  if (c.method == "direct") return direct_mc(factor, event, c.trials, plan_of(c));
  return tilted_mc(factor, event, shift_function(factor.domain(), L), c.trials, plan_of(c));
}

int cmd_estimate(const ExperimentConfig& c) {
  const std::string cmd = "estimate";
  OutputFile csv(c, cmd, "estimates.csv");
  csv.stream() << kReportHeader;
  bool any_resolved = false;
  for (int N : c.sizes) {
    const PrecisionFactor factor = build_factor(c.dim, N);
    for (int L : c.margins) {
      if (L > N) {
        std::cout << "skip N=" << N << " L=" << L << ": L>N\n";
        continue;
      }
      const EstimateReport r = run_point(c, factor, L);
      any_resolved = any_resolved || r.resolved;
      write_report_row(csv.stream(), c.dim, N, L, r);
      const std::string text = report_json(c, cmd, r, N, L);
      // Provenance travels as JSON fields here, not as a comment line.
      write_file(std::filesystem::path(c.out) / ("estimate_" + point_tag(c.dim, N, L) + ".json"), text);
      std::cout << text;
    }
  }
  csv.commit();
  return any_resolved ? kPass : kInfeasible;
}

int cmd_scaling(const ExperimentConfig& c) {
  const std::string cmd = "scaling";
  OutputFile csv(c, cmd, "scaling.csv");
  csv.stream() << kReportHeader;
  std::vector<ScalingPoint> points;
  for (int N : c.sizes) {
    const PrecisionFactor factor = build_factor(c.dim, N);
    for (int L : c.margins) {
      if (L > N) continue;
      const EstimateReport r = run_point(c, factor, L);
      write_report_row(csv.stream(), c.dim, N, L, r);
      std::cout << "scaling N=" << N << " L=" << L << " log_p=" << format_double(r.log_estimate)
                << " ess=" << format_double(r.effective_sample_size) << (r.resolved ? "" : " unresolved") << '\n';
      if (r.resolved) points.push_back({N, L, r.log_estimate});
    }
  }
  csv.commit();
  if (points.empty()) {
    std::cerr << "scaling: no grid point produced a resolved estimate\n";
    return kInfeasible;
  }
  ScalingFit fit;
  try {
    fit = scaling_fit(c.dim, points);
  } catch (const ContractError& e) {
    std::cerr << "scaling: fit error: " << e.what() << '\n';
    return kInfeasible;
  }
  OutputFile summary(c, cmd, "scaling_fit.csv");
  summary.stream() << "n,points,slope,intercept,r_squared,slope_std_error,pass\n"
                   << c.dim << ',' << points.size() << ',' << format_double(fit.slope) << ','
                   << format_double(fit.intercept) << ',' << format_double(fit.r_squared) << ','
                   << format_double(fit.slope_std_error) << ',' << (fit.pass ? "PASS" : "FAIL") << '\n';
  summary.commit();
  std::cout << "fit slope=" << format_double(fit.slope) << " r2=" << format_double(fit.r_squared)
            << (fit.pass ? " PASS" : " FAIL") << '\n';
  return fit.pass ? kPass : kFail;
}

int cmd_certify(const ExperimentConfig& c) {
  const std::string cmd = "certify";
  OutputFile certs(c, cmd, "certificates.csv");
  write_certificate_header(certs.stream());
  OutputFile summary(c, cmd, "certify_summary.csv");
  summary.stream() << "n,N,L,alpha,c_hat,status,reason\n";
  bool ok = true;
  for (int N : c.sizes) {
    std::unique_ptr<PrecisionFactor> factor;
    for (int L : c.margins) {
      if (2 * L > N) {
        summary.stream() << c.dim << ',' << N << ',' << L << ",,,skipped,L>N/2\n";
        std::cout << "certify N=" << N << " L=" << L << " skipped: L>N/2\n";
        continue;
      }
      if (!factor) factor = std::make_unique<PrecisionFactor>(build_factor(c.dim, N));
      double alpha = c.alpha;
      std::string status = "ok", reason;
      try {
        if (alpha == 0.0) alpha = choose_alpha(*factor, L);
        const LiShaoCertificate cert = lishao_certificate(separated_boundary_set(*factor, L, alpha));
        write_certificate_row(certs.stream(), c.dim, N, L, alpha, cert);
        if (!(cert.log_bound <= cert.coarse_log_bound)) {
          status = "fail";
          reason = "log bound above |E| log(1/sqrt 2)";
        }
      } catch (const std::exception& e) {
        status = "fail";
        reason = e.what();
      }
      for (char& ch : reason)
        if (ch == ',' || ch == '\n') ch = ';';
      ok = ok && status == "ok";
      const double c_hat = std::log(2.0) / (2.0 * std::pow(alpha, c.dim - 1));
      summary.stream() << c.dim << ',' << N << ',' << L << ',' << format_double(alpha) << ','
                       << format_double(c_hat) << ',' << status << ',' << reason << '\n';
      std::cout << "certify N=" << N << " L=" << L << " alpha=" << format_double(alpha)
                << " c_hat=" << format_double(c_hat) << ' ' << status << (reason.empty() ? "" : ": " + reason)
                << '\n';
    }
  }
  certs.commit();
  summary.commit();
  return ok ? kPass : kFail;
}

int cmd_constructions_check(const ExperimentConfig& c) {
  const std::string cmd = "constructions-check";
  OutputFile csv(c, cmd, "constructions.csv");
  csv.stream() << "n,N,L,gamma,shift_energy,energy_ratio,min_slack,covering_size,covering_ratio,status\n";
  bool ok = true;
  for (int N : c.sizes) {
    if (N < 1) {
      std::cout << "constructions N=" << N << " skipped: N<1\n";
      continue;
    }
    const BoxDomain dom(c.dim, N);
    for (int L : c.margins) {
      if (L > N) continue;
      const ShiftFunction shift = shift_function(dom, L);
      const double scale = std::pow(static_cast<double>(N) / (L + 1), c.dim - 1);
      const double energy_ratio = shift.energy / scale;
      const double slack = shift_lower_bound_slack(shift);
      std::string status = "ok";
      std::size_t cover = 0;
      double cover_ratio = std::nan("");
      try {
        cover = covering_set(dom, L, c.gamma).centers.size();
        cover_ratio = static_cast<double>(cover) * std::pow(c.gamma, c.dim) / scale;
      } catch (const InvariantViolation&) {
        status = "coverage-gap";
      }
      if (slack < 0) status = "phi-below-bound";
      else if (energy_ratio > shift_energy_constant(c.dim)) status = "energy-above-constant";
      else if (status == "ok" && cover_ratio > covering_cardinality_constant(c.dim)) status = "covering-above-constant";
      ok = ok && status == "ok";
      csv.stream() << c.dim << ',' << N << ',' << L << ',' << format_double(c.gamma) << ','
                   << format_double(shift.energy) << ',' << format_double(energy_ratio) << ','
                   << format_double(slack) << ',' << cover << ',' << format_double(cover_ratio) << ',' << status
                   << '\n';
      std::cout << "constructions N=" << N << " L=" << L << " energy_ratio=" << format_double(energy_ratio)
                << " slack=" << format_double(slack) << " cover=" << cover << ' ' << status << '\n';
    }
  }
  csv.commit();
  return ok ? kPass : kFail;
}

}  // namespace
}  // namespace membrane::cli

int main(int argc, char** argv) {
  using namespace membrane::cli;
  CLI::App app{"Membrane model simulator and rare-event estimator"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::vector<std::string> overrides;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"greens-validate", "fit Green's function bound constants per N and check their stability"},
      {"sample", "draw fields on V_N (first N, first L) and dump them"},
      {"estimate", "estimate the event probability on V_{N-L} for every grid point"},
      {"scaling", "estimate log-probabilities over the grid and regress them on N^{n-1}/(L+1)^{n-1}"},
      {"certify", "build separated boundary sets and Li-Shao upper-bound certificates"},
      {"constructions-check", "check the shift function and the cube covering over the grid"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "key = value file");
    sub->add_option("-s,--set", overrides, "override, key=value (repeatable)");
    sub->add_option("-o,--out", out_dir, "output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::vector<std::pair<std::string, std::string>> entries;
    if (!config_path.empty())
      for (const auto& kv : read_config_file(config_path)) entries.push_back(kv);
    for (const auto& o : overrides) entries.push_back(split_override(o));
    if (!out_dir.empty()) entries.emplace_back("out", out_dir);
    const ExperimentConfig config = resolve_config(entries);
    std::error_code ec;
    std::filesystem::create_directories(config.out, ec);
    if (ec || !std::filesystem::is_directory(config.out)) throw IoError("cannot create output directory " + config.out);

    if (command == "greens-validate") return cmd_greens_validate(config);
    if (command == "sample") return cmd_sample(config);
    if (command == "estimate") return cmd_estimate(config);
    if (command == "scaling") return cmd_scaling(config);
    if (command == "certify") return cmd_certify(config);
    return cmd_constructions_check(config);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const membrane::DomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
}
