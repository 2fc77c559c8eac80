#include "dpsynth/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dpsynth/loss.hpp"
#include "dpsynth/sanitize.hpp"

namespace dpsynth {

Dataset generate_data(const GeneratorParams& params, std::size_t n, int d, CounterRng& rng) {
  if (n == 0) throw std::invalid_argument("generate_data: n must be positive");
  if (d < 1) throw std::invalid_argument("generate_data: d must be positive");
  Dataset out;
  out.points.reserve(n);
  switch (params.kind) {
    case GeneratorKind::Uniform: {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> p(d);
        for (int j = 0; j < d; ++j) p[j] = rng.next_double();
        out.points.push_back(std::move(p));
      }
      break;
    }
    case GeneratorKind::Clustered: {
      if (params.centers < 1)
        throw std::invalid_argument("generate_data: clustered needs centers >= 1");
      std::vector<std::vector<double>> centers(params.centers, std::vector<double>(d));
      for (auto& c : centers)
        for (int j = 0; j < d; ++j) c[j] = rng.next_double();
      for (std::size_t i = 0; i < n; ++i) {
        const auto& c = centers[rng.next_below(static_cast<std::uint64_t>(params.centers))];
        std::vector<double> p(d);
        for (int j = 0; j < d; ++j) {
          const double jitter = params.spread * (2.0 * rng.next_double() - 1.0);
          p[j] = std::clamp(c[j] + jitter, 0.0, 1.0);
        }
        out.points.push_back(std::move(p));
      }
      break;
    }
    case GeneratorKind::Segment: {
      const int axis = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(d)));
      std::vector<double> base(d);
      for (int j = 0; j < d; ++j) base[j] = rng.next_double();
      const double lo = 0.25 * rng.next_double();
      const double hi = 1.0 - 0.25 * rng.next_double();
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> p = base;
        p[axis] = lo + (hi - lo) * rng.next_double();
        out.points.push_back(std::move(p));
      }
      break;
    }
  }
  return out;
}

void SweepConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("SweepConfig: trials must be positive");
  if (n_values.empty()) throw std::invalid_argument("SweepConfig: empty n grid");
  for (std::size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] <= n_values[i - 1])
      throw std::invalid_argument("SweepConfig: n values must be strictly increasing");
  if (d < 1 || s < 1 || s > d) throw std::invalid_argument("SweepConfig: bad dimensions");
  if (!(epsilon > 0.0)) throw std::invalid_argument("SweepConfig: epsilon must be positive");
}

int theorem_optimal_k(std::size_t n, int d, int s, double epsilon) {
  const double logterm = std::log(epsilon * static_cast<double>(n));
  const double ratio = logterm * logterm / (static_cast<double>(n) * epsilon);
  const double k = std::pow(ratio, -1.0 / s) / d;
  return std::max(2, static_cast<int>(std::llround(k)));
}

namespace {

std::size_t thread_cap() {
  if (const char* env = std::getenv("DP_SANITIZE_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

Dataset snap_to_grid(const Dataset& raw, int k) {
  Dataset snapped;
  snapped.points.reserve(raw.n());
  for (const auto& p : raw.points) {
    const MultiIndex idx = discretize_point(p, k);
    std::vector<double> c(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) c[j] = (2.0 * idx[j] + 1.0) / (2.0 * k);
    snapped.points.push_back(std::move(c));
  }
  return snapped;
}

}  // namespace

std::vector<SweepRow> rate_sweep(const SweepConfig& config) {
  config.validate();
  const CounterRng base(config.base_seed);
  std::vector<SweepRow> rows;
  for (std::size_t ni = 0; ni < config.n_values.size(); ++ni) {
    const std::size_t n = config.n_values[ni];
    const int k = config.k_rule == KRule::Fixed ? config.fixed_k
                                                : theorem_optimal_k(n, config.d, config.s,
                                                                    config.epsilon);
    GridSpec spec{config.d, config.s, k};
    spec.validate();
    checked_grid_size(k, config.d);

    CounterRng data_rng = base.derive(1000 + ni);
    const Dataset dataset = snap_to_grid(
        generate_data(config.generator, n, config.d, data_rng), k);
    const GridHistogram input = empirical_measure(dataset, spec);

    std::vector<double> losses(static_cast<std::size_t>(config.trials), 0.0);
    std::vector<std::string> errors(static_cast<std::size_t>(config.trials));
    auto run_trial = [&](int t) {
      try {
        ReleaseRequest req;
        req.spec = spec;
        req.budget.epsilon = config.epsilon;
        req.mode = Step3Mode::Exact;
        req.delta_fail = 0.1;
        req.mc_samples = 1;  // certificates are not consumed by the sweep
        req.seed = CounterRng(config.base_seed).derive(2000 + ni).derive(t).next_u64();
        const ReleaseBundle bundle = run_algorithm1(dataset, req);
        // Both measures live on the k grid, so the bracket collapses to the
        // exact max-marginal transport distance.
        losses[static_cast<std::size_t>(t)] =
            utility_loss_bounds(input, bundle.measure, config.s, k).ub;
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(t)] = e.what();
      }
    };

    const std::size_t workers =
        std::min(thread_cap(), static_cast<std::size_t>(config.trials));
    if (workers <= 1) {
      for (int t = 0; t < config.trials; ++t) run_trial(t);
    } else {
      std::vector<std::thread> pool;
      std::size_t next = 0;
      std::mutex m;
      for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          while (true) {
            std::size_t t;
            {
              std::lock_guard<std::mutex> lock(m);
              if (next >= static_cast<std::size_t>(config.trials)) return;
              t = next++;
            }
            run_trial(static_cast<int>(t));
          }
        });
      for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
      if (!err.empty()) throw std::runtime_error("rate_sweep trial failed: " + err);

    SweepRow row;
    row.n = n;
    row.k = k;
    row.trials = config.trials;
    row.seed = config.base_seed;
    double mean = 0.0;
    for (double v : losses) mean += v;
    mean /= static_cast<double>(config.trials);
    double var = 0.0;
    for (double v : losses) var += (v - mean) * (v - mean);
    row.mean_loss = mean;
    row.std_loss = config.trials > 1 ? std::sqrt(var / (config.trials - 1)) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

double slope_fit(const std::vector<SweepRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows)
    if (r.mean_loss > 0.0)
      pts.emplace_back(std::log(static_cast<double>(r.n)), std::log(r.mean_loss));
  if (pts.size() < 3)
    throw std::invalid_argument("slope_fit: need at least 3 rows with positive loss");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  return sxy / sxx;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "n,k,mean_loss,std_loss,trials,seed\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.n << "," << r.k << "," << r.mean_loss << "," << r.std_loss << "," << r.trials
        << "," << r.seed << "\n";
  return out.str();
}

}  // namespace dpsynth
