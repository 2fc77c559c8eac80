#include "dpsynth/sanitize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dpsynth/errors.hpp"

namespace dpsynth {

using nlohmann::json;

void ReleaseRequest::validate(std::size_t n) const {
  spec.validate();
  budget.validate();
  if (n == 0) throw std::invalid_argument("release: dataset must be nonempty");
  if (!(delta_fail > 0.0 && delta_fail < 1.0))
    throw std::invalid_argument("release: delta_fail must lie in (0,1)");
  if (mc_samples < 1) throw std::invalid_argument("release: mc_samples must be positive");
  if (mode == Step3Mode::Public) {
    if (public_points.empty()) throw std::invalid_argument("release: empty public set");
    for (const auto& z : public_points) {
      if (static_cast<int>(z.size()) != spec.d)
        throw std::invalid_argument("release: public point dimension mismatch");
      for (double x : z)
        if (!(x >= 0.0 && x <= 1.0))
          throw std::invalid_argument("release: public point outside [0,1]^d");
    }
  } else {
    checked_grid_size(spec.k, spec.d);  // exact mode materializes the joint grid
  }
}

Certificate certify(const GridHistogram& mu, const MarginalBlockVector& nu_dp,
                    const GridSpec& spec, double quantile, ProxyLossKind loss_kind) {
  if (mu.dims != spec.d || mu.k != spec.k)
    throw std::invalid_argument("certify: measure is not on the grid of spec");
  Certificate cert;
  cert.discretization_error = 1.0 / (2.0 * spec.k);
  cert.privatization_quantile = quantile;
  // Grid-supported measures have no extra right-inverse gap, so the
  // projection term is the proxy loss against T mu alone.
  cert.projection_error = proxy_loss(loss_kind, nu_dp, apply_T(mu, spec), spec);
  cert.total = cert.discretization_error + cert.privatization_quantile + cert.projection_error;
  cert.loss_kind = loss_kind;
  cert.k = spec.k;
  cert.s = spec.s;
  cert.d = spec.d;
  return cert;
}

ReleaseBundle complete_release(const MarginalBlockVector& nu_dp, const ReleaseRequest& request,
                               std::size_t n) {
  request.validate(n);
  const GridSpec& spec = request.spec;

  GridHistogram measure = [&] {
    if (request.mode == Step3Mode::Exact) {
      const LPProblem p = build_step3_exact(nu_dp, spec);
      return step3_exact_measure(lp_solve(p), spec);
    }
    const LPProblem p = build_step3_public(nu_dp, request.public_points, spec);
    return step3_public_measure(lp_solve(p), request.public_points, spec);
  }();

  // Certificate randomness lives on its own stream so it never correlates
  // with the released noise.
  const CounterRng mc_rng = CounterRng(request.seed).derive(1);
  const double quantile = noise_quantile_mc(spec, request.budget, n, ProxyLossKind::UT,
                                            request.delta_fail, request.mc_samples, mc_rng);
  Certificate cert = certify(measure, nu_dp, spec, quantile, ProxyLossKind::UT);
  cert.delta_fail = request.delta_fail;
  cert.mc_samples = request.mc_samples;
  cert.epsilon = request.budget.epsilon;
  cert.delta_dp = request.budget.delta_dp;
  cert.seed = request.seed;
  return ReleaseBundle(std::move(measure), cert, nu_dp);
}

ReleaseBundle run_algorithm1(const Dataset& dataset, const ReleaseRequest& request) {
  dataset.validate();
  request.validate(dataset.n());
  const GridSpec& spec = request.spec;
  const MarginalBlockVector v = apply_T(empirical_measure(dataset, spec), spec);
  const CounterRng noise_rng = CounterRng(request.seed).derive(0);
  const MarginalBlockVector nu_dp = privatize(v, request.budget, spec, dataset.n(), noise_rng);
  // From here on the raw data is out of reach: Steps 3-4 see only nu_dp.
  return complete_release(nu_dp, request, dataset.n());
}

Dataset sample_synthetic(const GridHistogram& measure, std::size_t n_out, CounterRng& rng) {
  if (n_out == 0) throw std::invalid_argument("sample_synthetic: n_out must be positive");
  if (!measure.is_probability(1e-9))
    throw std::invalid_argument("sample_synthetic: not a probability measure");
  std::vector<double> cum;
  std::vector<const MultiIndex*> cells;
  cum.reserve(measure.weights.size());
  double acc = 0.0;
  for (const auto& [idx, w] : measure.weights) {
    acc += std::max(w, 0.0);
    cum.push_back(acc);
    cells.push_back(&idx);
  }
  Dataset out;
  out.points.reserve(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double u = rng.next_double() * acc;
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    const std::size_t cell = std::min<std::size_t>(it - cum.begin(), cells.size() - 1);
    out.points.push_back(measure.center(*cells[cell]));
  }
  return out;
}

namespace {

std::string kind_name(ProxyLossKind k) { return k == ProxyLossKind::UT ? "UT" : "LT"; }

ProxyLossKind kind_from(const std::string& s) {
  if (s == "UT") return ProxyLossKind::UT;
  if (s == "LT") return ProxyLossKind::LT;
  throw std::invalid_argument("unknown loss kind: " + s);
}

}  // namespace

std::string certificate_to_json(const Certificate& cert) {
  json doc;
  doc["discretization_error"] = cert.discretization_error;
  doc["privatization_quantile"] = cert.privatization_quantile;
  doc["projection_error"] = cert.projection_error;
  doc["total"] = cert.total;
  doc["loss_kind"] = kind_name(cert.loss_kind);
  doc["delta_fail"] = cert.delta_fail;
  doc["mc_samples"] = cert.mc_samples;
  doc["k"] = cert.k;
  doc["s"] = cert.s;
  doc["d"] = cert.d;
  doc["epsilon"] = cert.epsilon;
  doc["delta_dp"] = cert.delta_dp;
  doc["seed"] = cert.seed;
  return doc.dump(2) + "\n";
}

Certificate certificate_from_json(const std::string& text) {
  const json doc = json::parse(text);
  Certificate cert;
  cert.discretization_error = doc.at("discretization_error").get<double>();
  cert.privatization_quantile = doc.at("privatization_quantile").get<double>();
  cert.projection_error = doc.at("projection_error").get<double>();
  cert.total = doc.at("total").get<double>();
  cert.loss_kind = kind_from(doc.at("loss_kind").get<std::string>());
  cert.delta_fail = doc.at("delta_fail").get<double>();
  cert.mc_samples = doc.at("mc_samples").get<int>();
  cert.k = doc.at("k").get<int>();
  cert.s = doc.at("s").get<int>();
  cert.d = doc.at("d").get<int>();
  cert.epsilon = doc.at("epsilon").get<double>();
  cert.delta_dp = doc.at("delta_dp").get<double>();
  cert.seed = doc.at("seed").get<std::uint64_t>();
  return cert;
}

std::string nu_dp_to_json(const MarginalBlockVector& nu_dp, std::size_t n,
                          const ReleaseRequest& request) {
  json doc;
  doc["d"] = nu_dp.spec.d;
  doc["s"] = nu_dp.spec.s;
  doc["k"] = nu_dp.spec.k;
  doc["n"] = n;
  doc["epsilon"] = request.budget.epsilon;
  doc["delta_dp"] = request.budget.delta_dp;
  doc["seed"] = request.seed;
  doc["delta_fail"] = request.delta_fail;
  doc["mc_samples"] = request.mc_samples;
  doc["mode"] = request.mode == Step3Mode::Exact ? "exact" : "public";
  doc["data"] = nu_dp.data;
  return doc.dump(2) + "\n";
}

NuDpSnapshot nu_dp_from_json(const std::string& text) {
  const json doc = json::parse(text);
  GridSpec spec;
  spec.d = doc.at("d").get<int>();
  spec.s = doc.at("s").get<int>();
  spec.k = doc.at("k").get<int>();
  spec.validate();
  MarginalBlockVector nu(spec);
  const auto data = doc.at("data").get<std::vector<double>>();
  if (data.size() != nu.data.size())
    throw std::invalid_argument("nu_dp document: data length does not match spec");
  nu.data = data;
  NuDpSnapshot snap{std::move(nu), doc.at("n").get<std::size_t>(), ReleaseRequest{}};
  snap.request.spec = spec;
  snap.request.budget.epsilon = doc.at("epsilon").get<double>();
  snap.request.budget.delta_dp = doc.at("delta_dp").get<double>();
  snap.request.seed = doc.at("seed").get<std::uint64_t>();
  snap.request.delta_fail = doc.at("delta_fail").get<double>();
  snap.request.mc_samples = doc.at("mc_samples").get<int>();
  snap.request.mode =
      doc.at("mode").get<std::string>() == "public" ? Step3Mode::Public : Step3Mode::Exact;
  return snap;
}

std::string measure_to_json(const GridHistogram& h) {
  json doc;
  doc["d"] = h.dims;
  doc["k"] = h.k;
  json cells = json::array();
  for (const auto& [idx, w] : h.weights) {
    json cell;
    cell["i"] = idx;
    cell["w"] = w;
    cells.push_back(std::move(cell));
  }
  doc["cells"] = std::move(cells);
  return doc.dump(2) + "\n";
}

GridHistogram measure_from_json(const std::string& text) {
  const json doc = json::parse(text);
  GridHistogram h;
  h.dims = doc.at("d").get<int>();
  h.k = doc.at("k").get<int>();
  for (const auto& cell : doc.at("cells")) {
    const auto idx = cell.at("i").get<MultiIndex>();
    h.add(idx, cell.at("w").get<double>());
  }
  return h;
}

}  // namespace dpsynth
