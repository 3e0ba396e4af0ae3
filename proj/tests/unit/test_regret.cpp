#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ebayes/error.hpp"
#include "ebayes/random.hpp"
#include "ebayes/regret.hpp"
#include "oracles.hpp"

using namespace ebayes;

namespace {

// Step rule through the given values at 0..len-1.
FittedEstimator step_rule(const std::vector<double>& values) {
  std::vector<Knot> knots;
  for (std::size_t i = 0; i < values.size(); ++i) knots.push_back({static_cast<std::int64_t>(i), values[i]});
  return FittedEstimator(Method::erm, 1, StepEstimator(knots, isotonic::Direction::nondecreasing));
}

DiscretePrior point_mass(double theta) { return DiscretePrior(1, {theta}, {1.0}); }

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.prior = Prior(UniformInterval{0.0, 5.0});
  c.sample_sizes = {100, 400};
  c.methods = {Method::erm, Method::robbins, Method::mono_robbins};
  c.replications = 3;
  c.seed = 7;
  return c;
}

}  // namespace

TEST(Regret, BayesRuleHasZeroRegret) {
  const auto t = bayes_estimator(discretize(Prior(ExponentialRate{1.0})));
  std::vector<double> values;
  for (std::int64_t x = 0; x < t.extents()[0]; ++x) values.push_back(t.bayes(static_cast<std::size_t>(x), 0));
  const auto eval = evaluate_regret(step_rule(values), t);
  EXPECT_NEAR(eval.regret, 0.0, 10 * t.tail_tol());
  EXPECT_GE(eval.tail_bound, 0.0);
}

TEST(Regret, ConstantAgainstPointMass) {
  const auto t = bayes_estimator(point_mass(2.0));
  // The table drops at most tail_tol of mass, each unit costing theta^2 = 4.
  const auto eval = evaluate_regret(step_rule({0.0}), t);
  EXPECT_LE(eval.regret, 4.0);
  EXPECT_NEAR(eval.regret, 4.0, eval.tail_bound);
  EXPECT_NEAR(mmse(t), 0.0, 4.0 * 10 * t.tail_tol());
}

TEST(Regret, IdentityAgainstPointMassIsPoissonVariance) {
  const auto t = bayes_estimator(point_mass(3.0));
  std::vector<double> identity;
  for (std::int64_t x = 0; x < t.extents()[0]; ++x) identity.push_back(static_cast<double>(x));
  EXPECT_NEAR(conditional_regret(step_rule(identity), t), 3.0, 1e-8);
}

TEST(Regret, DimensionMismatch) {
  const auto t = bayes_estimator(discretize(Prior(ProductPrior{{Prior(ExponentialRate{1.0}), Prior(ExponentialRate{1.0})}})));
  EXPECT_THROW(evaluate_regret(step_rule({1.0}), t), ValidationError);
}

TEST(Mmse, ClosedForms) {
  const auto pm = bayes_estimator(point_mass(4.0));
  EXPECT_NEAR(mmse(pm), 0.0, 16.0 * 10 * pm.tail_tol());
  EXPECT_NEAR(mmse(bayes_estimator(discretize(Prior(ExponentialRate{1.0})))), 0.5, 1e-4);
  // Exp(rate): posterior Gamma(x + 1, 1 + rate), so mmse = E[X + 1] / (1 + rate)^2.
  EXPECT_NEAR(mmse(bayes_estimator(discretize(Prior(ExponentialRate{2.0})))), 1.5 / 9.0, 1e-6);
}

TEST(Mmse, BoundedByMean) {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = oracle::random_atoms(gen, 8, 15.0);
    const DiscretePrior p(1, a.theta, a.prob);
    const double m = mmse(bayes_estimator(p));
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, p.mean(0) + 1e-9);
  }
}

TEST(Regret, MonteCarloConsistency) {
  const DiscreteAtoms atoms{1, {0.5, 2.0, 6.0, 9.0}, {0.3, 0.3, 0.2, 0.2}};
  const Prior prior(atoms);
  const auto table = bayes_estimator(discretize(prior));
  const auto train = sample(prior, 300, 1);
  const auto est = fit(Method::erm, tabulate(train.observations, 1));
  const double exact = conditional_regret(est, table);

  const auto test = sample(prior, 1'000'000, 2);
  double s = 0, s2 = 0, d = 0, d2 = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const std::vector<std::int64_t> x{test.observations[i]};
    const double e = est.evaluate(x, 0) - test.thetas[i];
    const double b = table.contains(x) ? table.bayes(table.index_of(x), 0) - test.thetas[i] : 0.0;
    s += e * e;
    s2 += e * e * e * e;
    d += e * e - b * b;
    d2 += (e * e - b * b) * (e * e - b * b);
  }
  const double n = static_cast<double>(test.size());
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(mean - mmse(table), exact, 4 * se);
  const double dmean = d / n, dse = std::sqrt((d2 / n - dmean * dmean) / n);
  EXPECT_NEAR(dmean, exact, 4 * dse);
}

// -- experiments ------------------------------------------------------------------

TEST(Experiment, RowsMatchConfig) {
  const auto c = small_config();
  const auto r = run_experiment(c);
  ASSERT_EQ(r.rows.size(), 3u * 2u * 3u);
  std::size_t i = 0;
  for (auto m : c.methods)
    for (auto n : c.sample_sizes)
      for (std::size_t rep = 0; rep < 3; ++rep, ++i) {
        EXPECT_EQ(r.rows[i].method, m);
        EXPECT_EQ(r.rows[i].n, n);
        EXPECT_EQ(r.rows[i].rep, rep);
        EXPECT_EQ(r.rows[i].dim, 1u);
        EXPECT_GE(r.rows[i].regret, -10 * c.tail_tol);
      }
  ASSERT_EQ(r.aggregates.size(), 6u);
  EXPECT_EQ(r.aggregates[0].method, Method::erm);
  EXPECT_EQ(r.aggregates[0].n, 100u);
  EXPECT_EQ(r.aggregates[0].replications, 3u);
  const double mean = (r.rows[0].regret + r.rows[1].regret + r.rows[2].regret) / 3.0;
  EXPECT_NEAR(r.aggregates[0].mean, mean, 1e-15);
}

TEST(Experiment, PairedModeSharesSamples) {
  auto c = small_config();
  const auto paired = run_experiment(c);
  const std::size_t block = c.sample_sizes.size() * c.replications;
  for (std::size_t i = 0; i < block; ++i) {
    EXPECT_EQ(paired.rows[i].seed, paired.rows[i + block].seed);
    EXPECT_EQ(paired.rows[i].seed, derive_seed(c.seed, {paired.rows[i].n, paired.rows[i].rep}));
  }
  c.paired = false;
  const auto unpaired = run_experiment(c);
  for (std::size_t i = 0; i < block; ++i) EXPECT_NE(unpaired.rows[i].seed, unpaired.rows[i + block].seed);
}

TEST(Experiment, DeterministicAcrossRunsAndThreads) {
  auto c = small_config();
  const std::string a = regret_csv(run_experiment(c));
  const std::string b = regret_csv(run_experiment(c));
  c.threads = 4;
  const std::string d = regret_csv(run_experiment(c));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, d);
}

TEST(Experiment, AggregationIgnoresRowOrder) {
  const auto r = run_experiment(small_config());
  auto shuffled = r.rows;
  std::mt19937_64 gen(5);
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  const auto a = aggregate(r.rows);
  const auto b = aggregate(shuffled);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].method, b[i].method);
    EXPECT_EQ(a[i].n, b[i].n);
    EXPECT_EQ(a[i].mean, b[i].mean);
    EXPECT_EQ(a[i].std_error, b[i].std_error);
  }
}

TEST(Experiment, CsvFormat) {
  const auto r = run_experiment(small_config());
  const std::string csv = regret_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,n,d,rep,regret,fit_ms,seed");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 19);
  const std::string first = csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) - csv.find('\n') - 1);
  EXPECT_EQ(first.rfind("erm,100,1,0,", 0), 0u);
  EXPECT_NE(first.find(",,"), std::string::npos);  // fit_ms left empty
  const std::string timed = regret_csv(r, true);
  EXPECT_EQ(timed.find(",,"), std::string::npos);
  EXPECT_EQ(fit_times_csv(r).rfind("method,n,d,rep,fit_ms\nerm,", 0), 0u);
  EXPECT_NE(regret_summary_json(r).find("\"aggregates\""), std::string::npos);
}

TEST(Experiment, MultiDimensional) {
  ExperimentConfig c;
  c.prior = Prior(TriangleUniform{{{{0, 0}, {5, 0}, {0, 5}}}});
  c.dim = 2;
  c.sample_sizes = {500};
  c.methods = {Method::erm_multi, Method::robbins_multi};
  c.replications = 2;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.dim, 2u);
    EXPECT_GT(row.regret, 0.0);
  }
}

TEST(Experiment, ConfigValidation) {
  auto key_of = [](ExperimentConfig c) {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<valid>");
  };
  auto c = small_config();
  EXPECT_EQ(key_of(c), "<valid>");
  auto bad = c;
  bad.replications = 0;
  EXPECT_EQ(key_of(bad), "R");
  bad = c;
  bad.sample_sizes = {100, 0};
  EXPECT_EQ(key_of(bad), "n");
  bad = c;
  bad.methods.clear();
  EXPECT_EQ(key_of(bad), "methods");
  bad = c;
  bad.methods = {Method::erm_geometric};
  EXPECT_EQ(key_of(bad), "methods");
  bad = c;
  bad.dim = 2;
  EXPECT_EQ(key_of(bad), "d");
  bad = c;
  bad.prior = Prior(TriangleUniform{{{{0, 0}, {5, 0}, {0, 5}}}});
  bad.dim = 2;
  EXPECT_EQ(key_of(bad), "methods");
  bad = c;
  bad.tail_tol = 0.0;
  EXPECT_EQ(key_of(bad), "tail_tol");
  bad = c;
  bad.threads = 0;
  EXPECT_EQ(key_of(bad), "threads");
  EXPECT_THROW(run_experiment(bad), ConfigError);
}

TEST(ExperimentConfigDoc, ParseAndEcho) {
  const auto c = parse_experiment_config(R"({
    "prior": {"type": "exponential", "rate": 2},
    "n": [100, 1000], "methods": ["erm", "robbins"], "R": 4, "seed": 11,
    "threads": 2, "paired": false, "quadrature": {"panels": 512}})");
  EXPECT_EQ(c.dim, 1u);
  EXPECT_EQ(c.sample_sizes, (std::vector<std::size_t>{100, 1000}));
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::erm, Method::robbins}));
  EXPECT_EQ(c.replications, 4u);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.threads, 2u);
  EXPECT_FALSE(c.paired);
  EXPECT_EQ(c.quadrature.panels, 512u);
  const auto again = parse_experiment_config(experiment_config_json(c));
  EXPECT_EQ(experiment_config_json(again), experiment_config_json(c));
}

TEST(ExperimentConfigDoc, ErrorsNameTheKey) {
  auto key_of = [](const std::string& text) {
    try {
      parse_experiment_config(text);
    } catch (const ConfigError& e) {
      return e.key() + "|" + e.what();
    }
    return std::string("<valid>");
  };
  const std::string prior = R"("prior": {"type": "exponential", "rate": 2})";
  const auto unknown = key_of("{" + prior + R"(, "n": [100], "methods": ["npmle"]})");
  EXPECT_EQ(unknown.rfind("methods|", 0), 0u);
  EXPECT_NE(unknown.find("unknown method"), std::string::npos);
  EXPECT_EQ(key_of("{" + prior + R"(, "n": [100], "methods": ["erm"], "R": 0})").rfind("R|", 0), 0u);
  EXPECT_EQ(key_of("{" + prior + R"(, "n": [], "methods": ["erm"]})").rfind("n|", 0), 0u);
  EXPECT_EQ(key_of("{" + prior + R"(, "n": [100], "methods": ["erm"], "bogus": 1})").rfind("bogus|", 0), 0u);
  EXPECT_EQ(key_of(R"({"n": [100], "methods": ["erm"]})").rfind("prior|", 0), 0u);
  EXPECT_EQ(key_of(R"({"prior": {"type": "exponential"}, "n": [100], "methods": ["erm"]})").rfind("prior.rate|", 0),
            0u);
  EXPECT_EQ(key_of("{" + prior + R"(, "n": [100], "methods": ["erm"], "seed": -1})").rfind("seed|", 0), 0u);
  EXPECT_EQ(key_of("{" + prior + R"(, "n": [100], "methods": ["erm_multi"], "d": 2})").rfind("d|", 0), 0u);
  EXPECT_THROW(parse_experiment_config("not json"), ConfigError);
}
