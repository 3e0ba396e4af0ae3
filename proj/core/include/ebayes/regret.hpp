#pragma once

// Exact regret of a fitted rule against a known prior, and the Monte-Carlo
// experiment runner built on it.
//
// Because f* is the posterior mean, the excess risk of any rule f splits as
//
//     E||f(X) - theta||^2 - E||f*(X) - theta||^2 = sum_x p(x) ||f(x) - f*(x)||^2,
//
// so regret is a finite sum over the mixture table with no sampling of theta.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ebayes/estimators.hpp"
#include "ebayes/mixtures.hpp"

namespace ebayes {

struct RegretEvaluation {
  double regret = 0.0;
  /// Bound on the mass outside the table: tail_tol * 10 * (largest squared
  /// error on the table's outer faces).
  double tail_bound = 0.0;
};

/// Throws ValidationError when the dimensions differ.
RegretEvaluation evaluate_regret(const FittedEstimator& estimator, const MixtureTable& table);
double conditional_regret(const FittedEstimator& estimator, const MixtureTable& table);

/// Bayes risk E||theta||^2 - sum_x p(x) ||f*(x)||^2.
double mmse(const MixtureTable& table);

struct ExperimentConfig {
  Prior prior{ExponentialRate{1.0}};
  std::size_t dim = 1;
  std::vector<std::size_t> sample_sizes;
  std::vector<Method> methods;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  double tail_tol = 1e-12;
  std::string output;
  /// Methods share the training sample of each (n, replication) cell.
  bool paired = true;
  std::size_t threads = 1;
  /// Write wall times into the fit_ms column (breaks byte-determinism).
  bool timing_in_csv = false;
  QuadratureOptions quadrature;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

struct RegretRow {
  Method method = Method::erm;
  std::size_t n = 0;
  std::size_t dim = 1;
  std::size_t rep = 0;
  double regret = 0.0;
  double tail_bound = 0.0;
  double fit_ms = 0.0;
  std::uint64_t seed = 0;
};

struct RegretAggregate {
  Method method = Method::erm;
  std::size_t n = 0;
  std::size_t replications = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double max_tail_bound = 0.0;
};

struct RegretReport {
  std::vector<RegretRow> rows;              // ordered by (method, n, rep) as configured
  std::vector<RegretAggregate> aggregates;  // one per (method, n)
  std::size_t dim = 1;
  std::uint64_t seed = 0;
  double mmse = 0.0;
  double captured_mass = 0.0;
  double tail_tol = 0.0;
  std::string prior;
  double elapsed_ms = 0.0;
};

RegretReport run_experiment(const ExperimentConfig& config);
/// Same, against a precomputed oracle table for config.prior.
RegretReport run_experiment(const ExperimentConfig& config, const MixtureTable& table);

/// Aggregates in (method, n) order computed from rows sorted by replication.
std::vector<RegretAggregate> aggregate(const std::vector<RegretRow>& rows);

/// `method,n,d,rep,regret,fit_ms,seed`. fit_ms is left empty unless
/// include_timing is set, so the file is a pure function of the config.
std::string regret_csv(const RegretReport& report, bool include_timing = false);
/// `method,n,d,rep,fit_ms` wall times.
std::string fit_times_csv(const RegretReport& report);
/// Aggregates and run metadata as JSON.
std::string regret_summary_json(const RegretReport& report);

// -- config documents --------------------------------------------------------

/// Keys: prior, d, n, methods, R, seed, tail_tol, output, paired, threads,
/// timing_in_csv, quadrature {tol, panels, triangle_subdivisions}.
ExperimentConfig parse_experiment_config(std::string_view json_text);
std::string experiment_config_json(const ExperimentConfig& config);

}  // namespace ebayes
