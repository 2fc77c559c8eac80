#include "dpsynth/lowdim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dpsynth/errors.hpp"
#include "dpsynth/lp.hpp"
#include "dpsynth/mechanism.hpp"

namespace dpsynth {

using nlohmann::json;

std::vector<double> project_l1_ball(const std::vector<double>& x, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_l1_ball: radius must be positive");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("project_l1_ball: non-finite input");
  double l1 = 0.0;
  for (double v : x) l1 += std::abs(v);
  if (l1 <= radius) return x;

  // Duchi et al. soft threshold from the sorted magnitudes.
  std::vector<double> mag(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mag[i] = std::abs(x[i]);
  std::sort(mag.begin(), mag.end(), std::greater<double>());
  double prefix = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < mag.size(); ++j) {
    prefix += mag[j];
    const double cand = (prefix - radius) / static_cast<double>(j + 1);
    if (mag[j] - cand > 0.0)
      theta = cand;
    else
      break;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = std::max(std::abs(x[i]) - theta, 0.0);
    out[i] = x[i] >= 0 ? m : -m;
  }
  return out;
}

namespace {

// Joint LP: min over mu in the simplex of the flat metric between nu and mu,
// in dual (flow) form. Variables [y+ | y- | u+ | u- | mu] with
// div(y)_i + u+_i - u-_i + mu_i = nu_i and sum mu = 1.
GridHistogram fit_flat_metric(const std::vector<double>& nu, int k, int d,
                              const SnakeOrder& order) {
  const std::uint64_t n_cells = order.size();

  // King-move edges (forward offsets).
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> offsets;
  {
    std::vector<int> off(d, -1);
    while (true) {
      bool positive = false;
      for (int a = d - 1; a >= 0; --a) {
        if (off[a] > 0) {
          positive = true;
          break;
        }
        if (off[a] < 0) break;
      }
      if (positive) offsets.push_back(off);
      int a = 0;
      while (a < d && off[a] == 1) off[a++] = -1;
      if (a == d) break;
      ++off[a];
    }
    MultiIndex nb(d);
    for (std::uint64_t i = 0; i < n_cells; ++i) {
      const MultiIndex idx = order.index_at(i);
      for (const auto& o : offsets) {
        bool ok = true;
        for (int a = 0; a < d; ++a) {
          const long long t = static_cast<long long>(idx[a]) + o[a];
          if (t < 0 || t >= k) {
            ok = false;
            break;
          }
          nb[a] = static_cast<std::uint32_t>(t);
        }
        if (ok) edges.emplace_back(static_cast<int>(i), static_cast<int>(order.position_of(nb)));
      }
    }
  }

  const std::size_t E = edges.size();
  const std::size_t n = static_cast<std::size_t>(n_cells);
  // Estimated nonzeros: 4 per edge pair + 3 per cell + simplex row.
  if (8 * E + 4 * n > guards::kMaxLPNonzeros)
    throw CapacityError("lowdim fit: instance exceeds the LP size guard");

  LPProblem p;
  const int yplus = 0;
  const int yminus = static_cast<int>(E);
  const int uplus = static_cast<int>(2 * E);
  const int uminus = static_cast<int>(2 * E + n);
  const int muvar = static_cast<int>(2 * E + 2 * n);
  p.n_vars = static_cast<int>(2 * E + 3 * n);
  p.objective.assign(p.n_vars, 0.0);
  p.lower.assign(p.n_vars, 0.0);
  p.upper.assign(p.n_vars, kInf);
  const double invk = 1.0 / k;
  for (std::size_t e = 0; e < E; ++e) {
    p.objective[yplus + e] = invk;
    p.objective[yminus + e] = invk;
  }
  for (std::size_t i = 0; i < n; ++i) {
    p.objective[uplus + i] = 1.0;
    p.objective[uminus + i] = 1.0;
  }

  std::vector<SparseRow> rows(n);
  for (std::size_t e = 0; e < E; ++e) {
    const auto [i, j] = edges[e];
    rows[static_cast<std::size_t>(i)].entries.emplace_back(yplus + static_cast<int>(e), 1.0);
    rows[static_cast<std::size_t>(i)].entries.emplace_back(yminus + static_cast<int>(e), -1.0);
    rows[static_cast<std::size_t>(j)].entries.emplace_back(yplus + static_cast<int>(e), -1.0);
    rows[static_cast<std::size_t>(j)].entries.emplace_back(yminus + static_cast<int>(e), 1.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].entries.emplace_back(uplus + static_cast<int>(i), 1.0);
    rows[i].entries.emplace_back(uminus + static_cast<int>(i), -1.0);
    rows[i].entries.emplace_back(muvar + static_cast<int>(i), 1.0);
    p.eq_rows.push_back(std::move(rows[i]));
    p.eq_rhs.push_back(nu[i]);
  }
  {
    SparseRow simplex;
    for (std::size_t i = 0; i < n; ++i)
      simplex.entries.emplace_back(muvar + static_cast<int>(i), 1.0);
    p.eq_rows.push_back(std::move(simplex));
    p.eq_rhs.push_back(1.0);
  }

  const LPSolution sol = lp_solve(p);
  if (sol.status != LPStatus::Optimal)
    throw std::runtime_error("lowdim fit: LP did not converge");
  GridHistogram h;
  h.dims = d;
  h.k = k;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sol.x[muvar + i] < 1e-12 ? 0.0 : sol.x[muvar + i];
    if (w > 0.0) {
      h.weights[order.index_at(i)] = w;
      mass += w;
    }
  }
  if (mass <= 0.0) throw std::runtime_error("lowdim fit: zero measure");
  for (auto& [idx, w] : h.weights) w /= mass;
  return h;
}

GridHistogram clip_and_renormalize(const std::vector<double>& nu, int k, int d,
                                   const SnakeOrder& order) {
  GridHistogram h;
  h.dims = d;
  h.k = k;
  double mass = 0.0;
  for (std::uint64_t i = 0; i < order.size(); ++i) {
    if (nu[i] > 1e-12) {
      h.weights[order.index_at(i)] = nu[i];
      mass += nu[i];
    }
  }
  if (mass <= 0.0) {
    // All mass clipped away (extreme noise): fall back to uniform.
    const double w = 1.0 / static_cast<double>(order.size());
    for (std::uint64_t i = 0; i < order.size(); ++i) h.weights[order.index_at(i)] = w;
    return h;
  }
  for (auto& [idx, w] : h.weights) w /= mass;
  return h;
}

}  // namespace

LowdimResult lowdim_release(const Dataset& dataset, int k, double epsilon,
                            const CounterRng& rng) {
  dataset.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("lowdim_release: epsilon must be positive");
  const int d = dataset.dim();
  const std::uint64_t n_cells = checked_grid_size(k, d);
  const SnakeOrder order(k, d);

  // Full-dimensional histogram, single block in snake order.
  std::vector<double> v(n_cells, 0.0);
  const double w = 1.0 / static_cast<double>(dataset.n());
  for (const auto& p : dataset.points) v[order.position_of(discretize_point(p, k))] += w;

  LowdimResult result;
  result.support = support_count(dataset, k);

  // Standard Laplace mechanism (Phi = identity), scale 2 / (n epsilon).
  std::vector<double> noisy = v;
  const double lambda = std::isinf(epsilon) ? 0.0 : 2.0 / (static_cast<double>(dataset.n()) * epsilon);
  if (lambda > 0.0) {
    CounterRng noise = rng.derive(0);
    for (std::uint64_t i = 0; i < n_cells; ++i) {
      const double eta = sample_laplace(lambda, noise);
      noisy[i] += eta;
      result.eta_inf = std::max(result.eta_inf, std::abs(eta));
    }
  }
  const std::vector<double> nu = project_l1_ball(noisy, 1.0);
  for (std::uint64_t i = 0; i < n_cells; ++i) result.nu_error_l1 += std::abs(nu[i] - v[i]);

  try {
    result.measure = fit_flat_metric(nu, k, d, order);
  } catch (const CapacityError&) {
    result.measure = clip_and_renormalize(nu, k, d, order);
  }
  return result;
}

double adaptive_score(int k, int d, std::uint64_t n, double epsilon, double support_estimate) {
  return 1.0 / (2.0 * k) +
         64.0 * std::log(std::pow(static_cast<double>(k), d) + 1.0) /
             (static_cast<double>(n) * epsilon) * support_estimate;
}

AdaptiveReport adaptive_select(const Dataset& dataset, int d, double epsilon, double c,
                               const CounterRng& rng) {
  dataset.validate();
  if (dataset.dim() != d) throw std::invalid_argument("adaptive_select: dimension mismatch");
  const auto n = static_cast<double>(dataset.n());
  if (!(n * epsilon >= d + 1))
    throw std::invalid_argument("adaptive_select: requires n * epsilon >= d + 1");

  AdaptiveReport report;
  report.epsilon = epsilon;
  report.c = c;
  report.n = dataset.n();
  report.eps_tilde = epsilon / (2.0 * (d + 1));

  const double ratio = d * d * std::log(epsilon * n) / (n * report.eps_tilde);
  std::vector<GridHistogram> measures;
  for (int sp = 0; sp <= d; ++sp) {
    const int k = std::max<int>(
        1, static_cast<int>(std::llround(std::pow(ratio, -1.0 / (sp + 1)))));
    LowdimResult rel = lowdim_release(dataset, k, report.eps_tilde, rng.derive(2 * sp));
    CounterRng sup_rng = rng.derive(2 * sp + 1);
    const double s_hat = static_cast<double>(support_count(dataset, k)) +
                         sample_laplace(1.0, sup_rng) / report.eps_tilde;
    AdaptiveRow row;
    row.s_prime = sp;
    row.k = k;
    row.support_estimate = s_hat;
    row.score = adaptive_score(k, d, dataset.n(), epsilon, s_hat);
    report.rows.push_back(row);
    measures.push_back(std::move(rel.measure));
  }
  report.s_opt = 0;
  for (int sp = 1; sp <= d; ++sp)
    if (report.rows[sp].score < report.rows[report.s_opt].score) report.s_opt = sp;
  report.measure = std::move(measures[static_cast<std::size_t>(report.s_opt)]);
  return report;
}

std::string adaptive_report_to_json(const AdaptiveReport& report) {
  json doc;
  doc["eps_tilde"] = report.eps_tilde;
  doc["epsilon"] = report.epsilon;
  doc["c"] = report.c;
  doc["n"] = report.n;
  doc["s_opt"] = report.s_opt;
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["s_prime"] = r.s_prime;
    row["k"] = r.k;
    row["support_estimate"] = r.support_estimate;
    row["score"] = r.score;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

AdaptiveReport adaptive_report_from_json(const std::string& text) {
  const json doc = json::parse(text);
  AdaptiveReport report;
  report.eps_tilde = doc.at("eps_tilde").get<double>();
  report.epsilon = doc.at("epsilon").get<double>();
  report.c = doc.at("c").get<double>();
  report.n = doc.at("n").get<std::uint64_t>();
  report.s_opt = doc.at("s_opt").get<int>();
  for (const auto& row : doc.at("rows")) {
    AdaptiveRow r;
    r.s_prime = row.at("s_prime").get<int>();
    r.k = row.at("k").get<int>();
    r.support_estimate = row.at("support_estimate").get<double>();
    r.score = row.at("score").get<double>();
    report.rows.push_back(r);
  }
  return report;
}

}  // namespace dpsynth
