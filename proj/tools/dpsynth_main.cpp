#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dpsynth/csv.hpp"
#include "dpsynth/errors.hpp"
#include "dpsynth/eval.hpp"
#include "dpsynth/lowdim.hpp"
#include "dpsynth/sanitize.hpp"

namespace {

using namespace dpsynth;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct SanitizeArgs {
  std::string in_path, public_path, bounds_path;
  std::string out_path, cert_path, nu_out_path, weights_out_path;
  double epsilon = 1.0, delta_dp = 0.0, delta_fail = 0.1;
  int s = 1, k = 4, mc = 200;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string mode = "exact";
};

int run_sanitize(const SanitizeArgs& a) {
  CsvData data = a.bounds_path.empty() ? load_csv(a.in_path)
                                       : load_csv_with_bounds(a.in_path, load_bounds(a.bounds_path));
  ReleaseRequest req;
  req.spec = GridSpec{data.dataset.dim(), a.s, a.k};
  req.budget = PrivacyBudget{a.epsilon, a.delta_dp};
  req.delta_fail = a.delta_fail;
  req.mc_samples = a.mc;
  req.seed = a.seed;
  if (a.mode == "public") {
    req.mode = Step3Mode::Public;
    if (a.public_path.empty())
      throw std::invalid_argument("public mode requires --public <csv>");
    // Public points share the private data's cube mapping.
    CsvData pub = load_csv_with_bounds(a.public_path, data.scaling);
    req.public_points = std::move(pub.dataset.points);
  } else if (a.mode != "exact") {
    throw std::invalid_argument("unknown mode '" + a.mode + "' (want exact|public)");
  }

  const ReleaseBundle bundle = run_algorithm1(data.dataset, req);
  if (!a.cert_path.empty()) write_text(a.cert_path, certificate_to_json(bundle.certificate));
  if (!a.nu_out_path.empty())
    write_text(a.nu_out_path, nu_dp_to_json(bundle.nu_dp, data.dataset.n(), req));
  if (!a.weights_out_path.empty()) write_text(a.weights_out_path, measure_to_json(bundle.measure));
  if (!a.out_path.empty()) {
    const std::size_t n_out = a.samples > 0 ? a.samples : data.dataset.n();
    CounterRng rng = CounterRng(a.seed).derive(2);
    const Dataset synthetic = sample_synthetic(bundle.measure, n_out, rng);
    write_csv(a.out_path, synthetic, data.scaling);
  }
  std::cout << "certificate total " << bundle.certificate.total << " (discretization "
            << bundle.certificate.discretization_error << ", privatization "
            << bundle.certificate.privatization_quantile << ", projection "
            << bundle.certificate.projection_error << ")\n";
  return 0;
}

int run_certify(const std::string& nu_path, const std::string& weights_path,
                const std::string& cert_out, const std::string& expect_path) {
  const NuDpSnapshot snap = nu_dp_from_json(read_text(nu_path));
  const GridHistogram measure = measure_from_json(read_text(weights_path));
  const CounterRng mc_rng = CounterRng(snap.request.seed).derive(1);
  const double quantile =
      noise_quantile_mc(snap.request.spec, snap.request.budget, snap.n, ProxyLossKind::UT,
                        snap.request.delta_fail, snap.request.mc_samples, mc_rng);
  Certificate cert = certify(measure, snap.nu_dp, snap.request.spec, quantile, ProxyLossKind::UT);
  cert.delta_fail = snap.request.delta_fail;
  cert.mc_samples = snap.request.mc_samples;
  cert.epsilon = snap.request.budget.epsilon;
  cert.delta_dp = snap.request.budget.delta_dp;
  cert.seed = snap.request.seed;
  if (!cert_out.empty()) write_text(cert_out, certificate_to_json(cert));
  std::cout << "recomputed certificate total " << cert.total << "\n";
  if (!expect_path.empty()) {
    const Certificate expect = certificate_from_json(read_text(expect_path));
    const double diff = std::abs(expect.total - cert.total);
    std::cout << "difference to expected total: " << diff << "\n";
    if (diff > 1e-9) {
      std::cerr << "certificate mismatch beyond 1e-9\n";
      return 1;
    }
  }
  return 0;
}

int run_evaluate(const std::string& a_path, const std::string& b_path, int s, int k_eval,
                 const std::string& bounds_path) {
  // Both files must land in the same cube; default to the union of ranges.
  ColumnScaling bounds;
  if (!bounds_path.empty()) {
    bounds = load_bounds(bounds_path);
  } else {
    const CsvData a = load_csv(a_path);
    const CsvData b = load_csv(b_path);
    if (a.scaling.mins.size() != b.scaling.mins.size())
      throw std::invalid_argument("evaluate: files have different column counts");
    bounds = a.scaling;
    for (std::size_t c = 0; c < bounds.mins.size(); ++c) {
      bounds.mins[c] = std::min(bounds.mins[c], b.scaling.mins[c]);
      bounds.maxs[c] = std::max(bounds.maxs[c], b.scaling.maxs[c]);
    }
  }
  const CsvData a = load_csv_with_bounds(a_path, bounds);
  const CsvData b = load_csv_with_bounds(b_path, bounds);
  const EvalBracket bracket = utility_loss_bounds(a.dataset, b.dataset, s, k_eval);
  std::cout << "lb " << bracket.lb << " ub " << bracket.ub << " core " << bracket.core
            << " residual_a " << bracket.residual_a << " residual_b " << bracket.residual_b
            << "\n";
  return 0;
}

struct SweepArgs {
  std::vector<std::size_t> n_values;
  int d = 2, s = 1, trials = 10, fixed_k = 0;
  double epsilon = 1.0;
  std::uint64_t seed = 0;
  std::string gen = "uniform", out_path;
};

int run_sweep(const SweepArgs& a) {
  SweepConfig cfg;
  cfg.n_values = a.n_values;
  cfg.d = a.d;
  cfg.s = a.s;
  cfg.epsilon = a.epsilon;
  cfg.trials = a.trials;
  cfg.base_seed = a.seed;
  if (a.fixed_k > 0) {
    cfg.k_rule = KRule::Fixed;
    cfg.fixed_k = a.fixed_k;
  }
  if (a.gen == "uniform")
    cfg.generator.kind = GeneratorKind::Uniform;
  else if (a.gen == "clustered")
    cfg.generator.kind = GeneratorKind::Clustered;
  else if (a.gen == "segment")
    cfg.generator.kind = GeneratorKind::Segment;
  else
    throw std::invalid_argument("unknown generator '" + a.gen + "'");
  const auto rows = rate_sweep(cfg);
  const std::string csv = sweep_to_csv(rows);
  if (!a.out_path.empty())
    write_text(a.out_path, csv);
  else
    std::cout << csv;
  try {
    std::cout << "log-log slope " << slope_fit(rows) << "\n";
  } catch (const std::exception&) {
    // fewer than 3 positive rows; nothing to fit
  }
  return 0;
}

struct LowdimArgs {
  std::string in_path, bounds_path, report_path, weights_out, out_path;
  double epsilon = 1.0, c = 1.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

int run_lowdim(const LowdimArgs& a) {
  CsvData data = a.bounds_path.empty() ? load_csv(a.in_path)
                                       : load_csv_with_bounds(a.in_path, load_bounds(a.bounds_path));
  const CounterRng rng(a.seed);
  const AdaptiveReport report =
      adaptive_select(data.dataset, data.dataset.dim(), a.epsilon, a.c, rng);
  const std::string doc = adaptive_report_to_json(report);
  if (!a.report_path.empty())
    write_text(a.report_path, doc);
  else
    std::cout << doc;
  if (!a.weights_out.empty()) write_text(a.weights_out, measure_to_json(report.measure));
  if (!a.out_path.empty()) {
    const std::size_t n_out = a.samples > 0 ? a.samples : data.dataset.n();
    CounterRng sample_rng = CounterRng(a.seed).derive(1u << 20);
    const Dataset synthetic = sample_synthetic(report.measure, n_out, sample_rng);
    write_csv(a.out_path, synthetic, data.scaling);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private synthetic data release with utility certificates"};
  app.require_subcommand(1);

  SanitizeArgs san;
  auto* c_san = app.add_subcommand("sanitize", "run the release pipeline on a CSV dataset");
  c_san->add_option("--in", san.in_path, "input CSV (header row required)")->required();
  c_san->add_option("--epsilon", san.epsilon, "privacy budget")->required();
  c_san->add_option("--delta-dp", san.delta_dp, "DP delta (0 = pure eps-DP)");
  c_san->add_option("--s", san.s, "marginal sparsity")->required();
  c_san->add_option("--k", san.k, "cells per axis")->required();
  c_san->add_option("--mode", san.mode, "exact|public");
  c_san->add_option("--public", san.public_path, "public data CSV (public mode)");
  c_san->add_option("--delta-fail", san.delta_fail, "certificate failure probability");
  c_san->add_option("--mc", san.mc, "Monte-Carlo samples for the quantile");
  c_san->add_option("--seed", san.seed, "base seed")->required();
  c_san->add_option("--out", san.out_path, "synthetic CSV output (original units)");
  c_san->add_option("--samples", san.samples, "synthetic rows to draw (default: input size)");
  c_san->add_option("--cert", san.cert_path, "certificate JSON output");
  c_san->add_option("--nu-out", san.nu_out_path, "privatized vector JSON output");
  c_san->add_option("--weights-out", san.weights_out_path, "released measure JSON output");
  c_san->add_option("--bounds", san.bounds_path, "public bounds CSV (min row + max row)");

  std::string nu_path, weights_path, cert_out, expect_path;
  auto* c_cert = app.add_subcommand("certify", "recompute a certificate from nu_dp + measure");
  c_cert->add_option("--nu", nu_path, "privatized vector JSON")->required();
  c_cert->add_option("--weights", weights_path, "measure JSON")->required();
  c_cert->add_option("--cert", cert_out, "certificate JSON output");
  c_cert->add_option("--expect", expect_path, "certificate JSON to validate against (1e-9)");

  std::string eval_a, eval_b, eval_bounds;
  int eval_s = 1, eval_k = 16;
  auto* c_eval = app.add_subcommand("evaluate", "utility-loss bracket between two CSVs");
  c_eval->add_option("--a", eval_a, "first CSV")->required();
  c_eval->add_option("--b", eval_b, "second CSV")->required();
  c_eval->add_option("--s", eval_s, "marginal sparsity");
  c_eval->add_option("--k-eval", eval_k, "evaluation grid resolution");
  c_eval->add_option("--bounds", eval_bounds, "shared bounds CSV");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "rate sweep over n, CSV output");
  c_sweep->add_option("--n", sweep.n_values, "n values (strictly increasing)")->required();
  c_sweep->add_option("--d", sweep.d, "ambient dimension");
  c_sweep->add_option("--s", sweep.s, "marginal sparsity");
  c_sweep->add_option("--epsilon", sweep.epsilon, "privacy budget");
  c_sweep->add_option("--trials", sweep.trials, "trials per n");
  c_sweep->add_option("--k", sweep.fixed_k, "fixed k (default: theorem-optimal rule)");
  c_sweep->add_option("--gen", sweep.gen, "uniform|clustered|segment");
  c_sweep->add_option("--seed", sweep.seed, "base seed")->required();
  c_sweep->add_option("--out", sweep.out_path, "output CSV path (default: stdout)");

  LowdimArgs low;
  auto* c_low = app.add_subcommand("lowdim", "adaptive low-dimensional release");
  c_low->add_option("--in", low.in_path, "input CSV")->required();
  c_low->add_option("--epsilon", low.epsilon, "total privacy budget")->required();
  c_low->add_option("--c", low.c, "rate-check constant (echoed in the report)");
  c_low->add_option("--seed", low.seed, "base seed")->required();
  c_low->add_option("--report", low.report_path, "adaptive report JSON output");
  c_low->add_option("--weights-out", low.weights_out, "released measure JSON output");
  c_low->add_option("--out", low.out_path, "synthetic CSV output");
  c_low->add_option("--samples", low.samples, "synthetic rows to draw");
  c_low->add_option("--bounds", low.bounds_path, "public bounds CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(c_san)) return run_sanitize(san);
    if (app.got_subcommand(c_cert)) return run_certify(nu_path, weights_path, cert_out, expect_path);
    if (app.got_subcommand(c_eval)) return run_evaluate(eval_a, eval_b, eval_s, eval_k, eval_bounds);
    if (app.got_subcommand(c_sweep)) return run_sweep(sweep);
    if (app.got_subcommand(c_low)) return run_lowdim(low);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
