#include "ebayes/regret.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ebayes/error.hpp"
#include "ebayes/number_format.hpp"
#include "ebayes/random.hpp"

namespace ebayes {

RegretEvaluation evaluate_regret(const FittedEstimator& estimator, const MixtureTable& table) {
  const std::size_t d = table.dim();
  if (estimator.dim() != d) {
    throw ValidationError("dimension mismatch: estimator d = " + std::to_string(estimator.dim()) +
                          ", table d = " + std::to_string(d));
  }
  RegretEvaluation out;
  std::vector<double> f(d);
  double boundary_max = 0.0;
  for (std::size_t idx = 0; idx < table.num_points(); ++idx) {
    const LatticePoint x = table.point(idx);
    estimator.evaluate(x, f);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = f[j] - table.bayes(idx, j);
      sq += diff * diff;
    }
    out.regret += table.pmf(idx) * sq;
    bool on_face = false;
    for (std::size_t j = 0; j < d; ++j) on_face = on_face || x[j] + 1 == table.extents()[j];
    if (on_face) boundary_max = std::max(boundary_max, sq);
  }
  out.tail_bound = table.tail_tol() * 10.0 * boundary_max;
  return out;
}

double conditional_regret(const FittedEstimator& estimator, const MixtureTable& table) {
  return evaluate_regret(estimator, table).regret;
}

double mmse(const MixtureTable& table) {
  double bayes_sq = 0.0;
  for (std::size_t idx = 0; idx < table.num_points(); ++idx) {
    double sq = 0.0;
    for (std::size_t j = 0; j < table.dim(); ++j) sq += table.bayes(idx, j) * table.bayes(idx, j);
    bayes_sq += table.pmf(idx) * sq;
  }
  return std::max(0.0, table.second_moment() - bayes_sq);
}

// -- experiment runner -------------------------------------------------------

void ExperimentConfig::validate() const {
  if (dim == 0) throw ConfigError("d", "must be >= 1");
  if (prior.dim() != dim) {
    throw ConfigError("d", "prior has dimension " + std::to_string(prior.dim()) + " but d = " + std::to_string(dim));
  }
  if (sample_sizes.empty()) throw ConfigError("n", "at least one sample size required");
  for (auto n : sample_sizes) {
    if (n == 0) throw ConfigError("n", "sample sizes must be >= 1");
  }
  if (methods.empty()) throw ConfigError("methods", "at least one method required");
  for (auto m : methods) {
    if (!is_poisson_method(m)) {
      throw ConfigError("methods", std::string("method ") + to_string(m) + " does not estimate Poisson means");
    }
    if (!supports_dimension(m, dim)) {
      throw ConfigError("methods", std::string("method ") + to_string(m) + " does not support d = " +
                                       std::to_string(dim));
    }
  }
  if (replications == 0) throw ConfigError("R", "must be >= 1");
  if (!(tail_tol > 0.0) || tail_tol > 1e-3) throw ConfigError("tail_tol", "must lie in (0, 1e-3]");
  if (threads == 0) throw ConfigError("threads", "must be >= 1");
}

namespace {

struct Cell {
  std::size_t n_index;
  std::size_t rep;
  std::vector<std::size_t> method_indices;  // all methods when paired
  std::uint64_t seed;
};

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<RegretAggregate> aggregate(const std::vector<RegretRow>& rows) {
  std::vector<RegretRow> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(), [](const RegretRow& a, const RegretRow& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.n != b.n) return a.n < b.n;
    return a.rep < b.rep;
  });
  std::vector<RegretAggregate> out;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    RegretAggregate agg;
    agg.method = sorted[i].method;
    agg.n = sorted[i].n;
    double sum = 0.0;
    while (j < sorted.size() && sorted[j].method == agg.method && sorted[j].n == agg.n) {
      sum += sorted[j].regret;
      agg.max_tail_bound = std::max(agg.max_tail_bound, sorted[j].tail_bound);
      ++j;
    }
    agg.replications = j - i;
    agg.mean = sum / static_cast<double>(agg.replications);
    double ss = 0.0;
    for (std::size_t k = i; k < j; ++k) ss += (sorted[k].regret - agg.mean) * (sorted[k].regret - agg.mean);
    agg.std_error = agg.replications > 1
                        ? std::sqrt(ss / static_cast<double>(agg.replications - 1) / static_cast<double>(agg.replications))
                        : 0.0;
    out.push_back(agg);
    i = j;
  }
  return out;
}

RegretReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const DiscretePrior discrete = discretize(config.prior, config.quadrature);
  const MixtureTable table = bayes_estimator(discrete, TruncationPolicy{config.tail_tol});
  return run_experiment(config, table);
}

RegretReport run_experiment(const ExperimentConfig& config, const MixtureTable& table) {
  config.validate();
  if (table.dim() != config.dim) throw ValidationError("oracle table dimension does not match config");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t num_methods = config.methods.size();
  const std::size_t num_sizes = config.sample_sizes.size();
  const std::size_t reps = config.replications;

  std::vector<Cell> cells;
  for (std::size_t ni = 0; ni < num_sizes; ++ni) {
    const auto n = static_cast<std::uint64_t>(config.sample_sizes[ni]);
    for (std::size_t r = 0; r < reps; ++r) {
      if (config.paired) {
        std::vector<std::size_t> all(num_methods);
        for (std::size_t m = 0; m < num_methods; ++m) all[m] = m;
        cells.push_back({ni, r, std::move(all), derive_seed(config.seed, {n, r})});
      } else {
        for (std::size_t m = 0; m < num_methods; ++m) {
          const auto label = static_cast<std::uint64_t>(config.methods[m]) + 1;
          cells.push_back({ni, r, {m}, derive_seed(config.seed, {n, r, label})});
        }
      }
    }
  }

  // Row slot for (method, n, rep) in configured order.
  auto slot = [&](std::size_t m, std::size_t ni, std::size_t r) { return (m * num_sizes + ni) * reps + r; };
  std::vector<RegretRow> rows(num_methods * num_sizes * reps);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= cells.size() || failed.load()) return;
      const Cell& cell = cells[c];
      const std::size_t n = config.sample_sizes[cell.n_index];
      std::size_t current_method = cell.method_indices.front();
      try {
        const SampleDraw draw = sample(config.prior, n, cell.seed);
        const auto tab_start = std::chrono::steady_clock::now();
        const EmpiricalCounts counts = tabulate(draw.observations, config.dim);
        const double tab_ms = ms_since(tab_start);
        for (std::size_t m : cell.method_indices) {
          current_method = m;
          const auto fit_start = std::chrono::steady_clock::now();
          const FittedEstimator est = fit(config.methods[m], counts);
          const double fit_ms = tab_ms + ms_since(fit_start);
          const RegretEvaluation eval = evaluate_regret(est, table);
          rows[slot(m, cell.n_index, cell.rep)] =
              RegretRow{config.methods[m], n, config.dim, cell.rep, eval.regret, eval.tail_bound, fit_ms, cell.seed};
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          std::ostringstream os;
          os << "experiment failed at method=" << to_string(config.methods[current_method]) << " n=" << n
             << " rep=" << cell.rep << ": " << e.what();
          first_error = std::make_exception_ptr(ExperimentError(os.str()));
        }
        failed.store(true);
        return;
      }
    }
  };

  const std::size_t num_threads = std::min(config.threads, std::max<std::size_t>(1, cells.size()));
  if (num_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(num_threads);
    for (std::size_t t = 0; t < num_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  RegretReport report;
  report.rows = std::move(rows);
  report.aggregates = aggregate(report.rows);
  // aggregate() sorts by enum order; present in configured method order instead.
  std::stable_sort(report.aggregates.begin(), report.aggregates.end(), [&](const auto& a, const auto& b) {
    auto pos = [&](Method m) { return std::find(config.methods.begin(), config.methods.end(), m) - config.methods.begin(); };
    if (a.method != b.method) return pos(a.method) < pos(b.method);
    return std::find(config.sample_sizes.begin(), config.sample_sizes.end(), a.n) <
           std::find(config.sample_sizes.begin(), config.sample_sizes.end(), b.n);
  });
  report.dim = config.dim;
  report.seed = config.seed;
  report.mmse = mmse(table);
  report.captured_mass = table.captured_mass();
  report.tail_tol = table.tail_tol();
  report.prior = config.prior.describe();
  report.elapsed_ms = ms_since(start);
  return report;
}

// -- outputs -----------------------------------------------------------------

std::string regret_csv(const RegretReport& report, bool include_timing) {
  std::ostringstream os;
  os << "method,n,d,rep,regret,fit_ms,seed\n";
  for (const auto& r : report.rows) {
    os << to_string(r.method) << ',' << r.n << ',' << r.dim << ',' << r.rep << ',' << format_double(r.regret) << ',';
    if (include_timing) os << format_double(r.fit_ms);
    os << ',' << format_uint(r.seed) << '\n';
  }
  return os.str();
}

std::string fit_times_csv(const RegretReport& report) {
  std::ostringstream os;
  os << "method,n,d,rep,fit_ms\n";
  for (const auto& r : report.rows) {
    os << to_string(r.method) << ',' << r.n << ',' << r.dim << ',' << r.rep << ',' << format_double(r.fit_ms) << '\n';
  }
  return os.str();
}

std::string regret_summary_json(const RegretReport& report) {
  using nlohmann::json;
  json aggs = json::array();
  for (const auto& a : report.aggregates) {
    aggs.push_back({{"method", to_string(a.method)},
                    {"n", a.n},
                    {"replications", a.replications},
                    {"mean_regret", a.mean},
                    {"std_error", a.std_error},
                    {"max_tail_bound", a.max_tail_bound}});
  }
  json doc = {{"d", report.dim},
              {"seed", report.seed},
              {"prior", report.prior},
              {"mmse", report.mmse},
              {"captured_mass", report.captured_mass},
              {"tail_tol", report.tail_tol},
              {"rows", report.rows.size()},
              {"aggregates", aggs}};
  return doc.dump(2) + "\n";
}

}  // namespace ebayes
