#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ebayes/error.hpp"
#include "ebayes/estimators.hpp"
#include "oracles.hpp"

using namespace ebayes;
using isotonic::Direction;

namespace {

EmpiricalCounts counts1(std::vector<std::int64_t> xs) { return tabulate(xs, 1); }

}  // namespace

// -- Robbins ---------------------------------------------------------------

TEST(Robbins, WorkedExamples) {
  const auto r = robbins(counts1({0, 0, 1, 2}));
  EXPECT_DOUBLE_EQ(r(0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r(1), 1.0);
  EXPECT_DOUBLE_EQ(r(2), 0.0);
  EXPECT_DOUBLE_EQ(robbins(counts1({0, 0}))(0), 0.0);
  const auto r11 = robbins(counts1({1, 1}));
  EXPECT_DOUBLE_EQ(r11(0), 2.0);
  EXPECT_DOUBLE_EQ(r11(1), 0.0);
}

TEST(Robbins, UnseenPointsUseTheFormula) {
  const auto r = robbins(counts1({3, 3, 4}));
  EXPECT_DOUBLE_EQ(r(2), 3.0 * 2.0 / 1.0);  // N(2) = 0
  EXPECT_DOUBLE_EQ(r(50), 0.0);
}

TEST(Robbins, MultiWorkedExamples) {
  const auto r = robbins_multi(tabulate(std::vector<LatticePoint>{{0, 0}, {1, 0}}));
  const std::vector<std::int64_t> origin{0, 0};
  EXPECT_DOUBLE_EQ(r.evaluate(origin, 0), 0.5);
  EXPECT_DOUBLE_EQ(r.evaluate(origin, 1), 0.0);
}

TEST(Robbins, MultiReducesToScalar) {
  const auto c = counts1({0, 0, 1, 2, 2, 5});
  const auto a = robbins(c);
  const auto b = robbins_multi(c);
  for (std::int64_t x = 0; x < 8; ++x) {
    const std::vector<std::int64_t> p{x};
    EXPECT_DOUBLE_EQ(a(x), b.evaluate(p, 0));
  }
}

TEST(Robbins, RejectsMultidimensionalData) {
  EXPECT_THROW(robbins(tabulate(std::vector<LatticePoint>{{0, 0}})), ValidationError);
}

// -- ERM (Poisson) -----------------------------------------------------------

TEST(ErmPoisson, ProblemConstruction) {
  const auto p = erm_poisson_problem(counts1({0, 0, 1, 2}));
  EXPECT_EQ(p.positions, (std::vector<std::int64_t>{0, 1, 2}));
  EXPECT_EQ(p.quad_weights, (std::vector<std::int64_t>{2, 1, 1}));
  EXPECT_EQ(p.lin_coeffs, (std::vector<std::int64_t>{1, 2, 0}));

  const auto q = erm_poisson_problem(counts1({3, 5}));
  EXPECT_EQ(q.positions, (std::vector<std::int64_t>{2, 3, 4, 5}));
  EXPECT_EQ(q.quad_weights, (std::vector<std::int64_t>{0, 1, 0, 1}));
  EXPECT_EQ(q.lin_coeffs, (std::vector<std::int64_t>{3, 0, 5, 0}));
}

TEST(ErmPoisson, WorkedExamples) {
  const auto f = erm_poisson(counts1({0, 1}));
  for (std::int64_t x = 0; x < 10; ++x) EXPECT_DOUBLE_EQ(f(x), 0.5);

  const auto g = erm_poisson(counts1({0, 0, 1, 2}));
  EXPECT_DOUBLE_EQ(g(0), 0.5);
  for (std::int64_t x = 1; x < 10; ++x) EXPECT_DOUBLE_EQ(g(x), 1.0);
  EXPECT_EQ(g.knots(), (std::vector<Knot>{{0, 0.5}, {1, 1.0}}));

  for (std::int64_t c = 1; c <= 6; ++c) {
    const auto h = erm_poisson(counts1({c}));
    for (std::int64_t x = 0; x < c - 1; ++x) EXPECT_DOUBLE_EQ(h(x), 0.0);
    for (std::int64_t x = c - 1; x < c + 5; ++x) EXPECT_DOUBLE_EQ(h(x), static_cast<double>(c));
  }
}

TEST(ErmPoisson, ExtensionRules) {
  // S = {2, 3, 4, 5, 8, 9}
  const auto f = erm_poisson(counts1({3, 3, 5, 9}));
  EXPECT_DOUBLE_EQ(f(-1), 0.0);
  EXPECT_DOUBLE_EQ(f(0), 0.0);
  EXPECT_DOUBLE_EQ(f(1), 0.0);
  EXPECT_GT(f(2), 0.0);
  EXPECT_DOUBLE_EQ(f(100), f(9));
  EXPECT_DOUBLE_EQ(f(6), f(5));
  EXPECT_DOUBLE_EQ(f(7), f(5));
  EXPECT_THROW(f(-2), ValidationError);
}

TEST(ErmPoisson, ZeroSampleGivesZero) {
  const auto f = erm_poisson(counts1({0, 0, 0}));
  for (std::int64_t x = -1; x < 5; ++x) EXPECT_DOUBLE_EQ(f(x), 0.0);
}

TEST(ErmPoisson, Deterministic) {
  std::mt19937_64 gen(1);
  const auto prior = oracle::random_atoms(gen, 5, 10.0);
  const auto xs = oracle::draw_sample(gen, prior, 500);
  EXPECT_EQ(erm_poisson(counts1(xs)), erm_poisson(counts1(xs)));
}

TEST(ErmPoissonProperty, MinimizesEmpiricalRiskAmongMonotone) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto prior = oracle::random_atoms(gen, 4, 8.0);
    const auto xs = oracle::draw_sample(gen, prior, 1 + trial * 3);
    const auto f = erm_poisson(counts1(xs));
    const double opt = oracle::poisson_empirical_risk(xs, [&](std::int64_t x) { return f(x); });
    const std::int64_t top = *std::max_element(xs.begin(), xs.end());
    for (int c = 0; c < 50; ++c) {
      const auto h = oracle::random_monotone(gen, static_cast<std::size_t>(top + 1), static_cast<double>(top + 2));
      const double risk = oracle::poisson_empirical_risk(xs, [&](std::int64_t x) { return h[std::min<std::int64_t>(x, top)]; });
      EXPECT_LE(opt, risk + 1e-9);
    }
  }
}

TEST(ErmPoissonProperty, BoundedBySampleMax) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto prior = oracle::random_atoms(gen, 6, 15.0);
    const auto xs = oracle::draw_sample(gen, prior, 1 + static_cast<std::size_t>(gen() % 1000));
    const auto f = erm_poisson(counts1(xs));
    const std::int64_t top = *std::max_element(xs.begin(), xs.end());
    for (std::int64_t x = 0; x <= top; ++x) ASSERT_LE(f(x), static_cast<double>(top)) << "trial " << trial;
  }
}

TEST(ErmPoissonProperty, FirstOrderInequality) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto prior = oracle::random_atoms(gen, 5, 10.0);
    const auto xs = oracle::draw_sample(gen, prior, 20 + static_cast<std::size_t>(gen() % 300));
    const auto f = erm_poisson(counts1(xs));
    auto fhat = [&](std::int64_t x) { return f(x); };
    const double base = oracle::poisson_empirical_risk(xs, fhat);
    const std::int64_t top = *std::max_element(xs.begin(), xs.end());
    for (int c = 0; c < 100; ++c) {
      const auto h = oracle::random_monotone(gen, static_cast<std::size_t>(top + 1), static_cast<double>(top + 2));
      auto hf = [&](std::int64_t x) { return h[std::min<std::int64_t>(x, top)]; };
      double gap = 0;
      for (auto x : xs) gap += (hf(x) - fhat(x)) * (hf(x) - fhat(x));
      gap /= static_cast<double>(xs.size());
      EXPECT_GE(oracle::poisson_empirical_risk(xs, hf) - base, gap - 1e-9);
    }
  }
}

TEST(ErmPoissonProperty, MonotoneAndNonNegative) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto prior = oracle::random_atoms(gen, 6, 20.0);
    const auto f = erm_poisson(counts1(oracle::draw_sample(gen, prior, 200)));
    double prev = 0.0;
    for (std::int64_t x = -1; x < 60; ++x) {
      EXPECT_GE(f(x), prev);
      prev = f(x);
    }
  }
}

// -- monotone Robbins ----------------------------------------------------------

TEST(MonotoneRobbins, WorkedExamples) {
  const auto f = monotone_robbins(counts1({0, 0, 1, 2}));
  EXPECT_DOUBLE_EQ(f(0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(f(1), 0.5);
  EXPECT_DOUBLE_EQ(f(2), 0.5);

  // Robbins vanishes at the last observed point, so it is monotone on the
  // observed support only when no two observations are adjacent.
  const auto c = counts1({0, 2, 2, 4});
  const auto r = robbins(c);
  const auto m = monotone_robbins(c);
  for (std::int64_t x : {0, 2, 4}) EXPECT_DOUBLE_EQ(m(x), r(x));

  const auto z = monotone_robbins(counts1({0, 0}));
  for (std::int64_t x = 0; x < 5; ++x) EXPECT_DOUBLE_EQ(z(x), 0.0);
}

TEST(MonotoneRobbinsProperty, IsWeightedProjection) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto prior = oracle::random_atoms(gen, 5, 8.0);
    const auto xs = oracle::draw_sample(gen, prior, 100);
    const auto c = counts1(xs);
    const auto r = robbins(c);
    const auto m = monotone_robbins(c);
    const std::int64_t top = c.max_coordinate(0);
    auto loss = [&](auto&& f) {
      double s = 0;
      for (auto x : xs) s += (f(x) - r(x)) * (f(x) - r(x));
      return s / static_cast<double>(xs.size());
    };
    const double opt = loss([&](std::int64_t x) { return m(x); });
    for (int k = 0; k < 100; ++k) {
      const auto h = oracle::random_monotone(gen, static_cast<std::size_t>(top + 1), static_cast<double>(top + 2));
      EXPECT_LE(opt, loss([&](std::int64_t x) { return h[x]; }) + 1e-9);
    }
  }
}

// -- multidimensional ERM -------------------------------------------------------

TEST(ErmMulti, WorkedExample) {
  const auto f = erm_poisson_multi(tabulate(std::vector<LatticePoint>{{0, 0}, {0, 1}, {1, 0}}));
  for (std::int64_t x = 0; x < 5; ++x) {
    const std::vector<std::int64_t> p{x, 0};
    EXPECT_DOUBLE_EQ(f.evaluate(p, 0), 0.5);
  }
  const std::vector<std::int64_t> p01{0, 1};
  EXPECT_DOUBLE_EQ(f.evaluate(p01, 0), 0.0);
  const std::vector<std::int64_t> off{0, 5};
  EXPECT_DOUBLE_EQ(f.evaluate(off, 0), 0.0);
  const std::vector<std::int64_t> minus{-1, 0};
  EXPECT_DOUBLE_EQ(f.evaluate(minus, 0), 0.0);
}

TEST(ErmMulti, OneDimensionReducesToScalar) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto prior = oracle::random_atoms(gen, 5, 10.0);
    const auto c = counts1(oracle::draw_sample(gen, prior, 300));
    const auto a = erm_poisson(c);
    const auto b = erm_poisson_multi(c);
    for (std::int64_t x = 0; x < 40; ++x) {
      const std::vector<std::int64_t> p{x};
      EXPECT_DOUBLE_EQ(a(x), b.evaluate(p, 0));
    }
  }
}

TEST(ErmMulti, ProductSampleMatchesOneDimensional) {
  const std::vector<std::int64_t> base{0, 0, 1, 2, 2, 3, 5};
  std::vector<LatticePoint> pts;
  for (auto a : base)
    for (auto b : base) pts.push_back({a, b});
  const auto f = erm_poisson_multi(tabulate(pts));
  const auto g = erm_poisson(counts1(base));
  for (std::int64_t other : {0, 1, 2, 3, 5}) {
    for (std::int64_t x = 0; x < 8; ++x) {
      const std::vector<std::int64_t> p0{x, other}, p1{other, x};
      EXPECT_NEAR(f.evaluate(p0, 0), g(x), 1e-15);
      EXPECT_NEAR(f.evaluate(p1, 1), g(x), 1e-15);
    }
  }
}

TEST(ErmMultiProperty, MatchesBruteForce) {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<std::int64_t> coord(0, 3);
  std::uniform_int_distribution<int> mult(1, 3);
  for (int trial = 0; trial < 150; ++trial) {
    std::set<LatticePoint> distinct;
    const int target = 1 + trial % 6;
    while (static_cast<int>(distinct.size()) < target) distinct.insert({coord(gen), coord(gen)});
    std::vector<LatticePoint> sample;
    for (const auto& p : distinct)
      for (int m = mult(gen); m > 0; --m) sample.push_back(p);
    const auto counts = tabulate(sample);
    const auto f = erm_poisson_multi(counts);

    // Joint objective sum_x N(x) (||f(x)||^2 - 2 sum_j x_j f_j(x - e_j)).
    double fitted = 0;
    for (const auto& e : counts.entries()) {
      for (std::size_t j = 0; j < 2; ++j) {
        auto prev = e.point;
        prev[j] -= 1;
        const double fx = f.evaluate(e.point, j);
        fitted += static_cast<double>(e.count) *
                  (fx * fx - 2.0 * static_cast<double>(e.point[j]) * f.evaluate(prev, j));
      }
    }

    // Brute force per (coordinate, line): enumerate monotone assignments of
    // candidate values on the positions {x_j, x_j - 1 : x on the line}.
    double brute = 0;
    for (std::size_t j = 0; j < 2; ++j) {
      std::map<std::int64_t, std::map<std::int64_t, std::int64_t>> lines;  // other coord -> x_j -> N
      for (const auto& e : counts.entries()) lines[e.point[1 - j]][e.point[j]] += e.count;
      for (const auto& [other, line] : lines) {
        std::set<std::int64_t> support;
        for (const auto& [x, n] : line) {
          support.insert(x);
          if (x > 0) support.insert(x - 1);
        }
        std::vector<double> v, w;
        for (auto a : support) {
          const auto it = line.find(a);
          const auto nxt = line.find(a + 1);
          v.push_back(it == line.end() ? 0.0 : static_cast<double>(it->second));
          w.push_back(nxt == line.end() ? 0.0 : static_cast<double>((a + 1) * nxt->second));
        }
        std::vector<double> candidates{0.0};
        for (std::size_t s = 0; s < v.size(); ++s) {
          double sv = 0, sw = 0;
          for (std::size_t t = s; t < v.size(); ++t) {
            sv += v[t];
            sw += w[t];
            if (sv > 0) candidates.push_back(sw / sv);
          }
        }
        brute += oracle::min_over_candidates(v, w, candidates);
      }
    }
    EXPECT_NEAR(fitted, brute, 1e-6) << "trial " << trial;
  }
}

TEST(ErmMultiProperty, CoordinatewiseMonotone) {
  std::mt19937_64 gen(9);
  std::poisson_distribution<std::int64_t> pois(4.0);
  std::vector<LatticePoint> pts;
  for (int i = 0; i < 2000; ++i) pts.push_back({pois(gen), pois(gen), pois(gen)});
  const auto f = erm_poisson_multi(tabulate(pts));
  for (std::size_t j = 0; j < 3; ++j) {
    for (const auto& [key, step] : f.classes(j)) {
      for (std::int64_t t = 0; t < 20; ++t) {
        LatticePoint x = key;
        x.insert(x.begin() + static_cast<std::ptrdiff_t>(j), t);
        LatticePoint y = x;
        y[j] += 1;
        EXPECT_LE(f.evaluate(x, j), f.evaluate(y, j));
      }
    }
  }
}

TEST(ErmMulti, NearestPopulatedPredecessor) {
  // Line x_2 = 0 holds x_1 in {2, 6}: S = {1, 2, 5, 6}. At x_1 = 4 the rule
  // takes the value at 2, not at 1.
  const auto f = erm_poisson_multi(tabulate(std::vector<LatticePoint>{{2, 0}, {6, 0}}));
  const auto g = erm_poisson(counts1({2, 6}));
  const std::vector<std::int64_t> p{4, 0};
  EXPECT_DOUBLE_EQ(f.evaluate(p, 0), g(2));
  EXPECT_DOUBLE_EQ(g(4), g(2));
}

// -- geometric and negative binomial ---------------------------------------------

TEST(ErmGeometric, WorkedExamples) {
  const auto f = erm_geometric(counts1({0, 0, 1}));
  EXPECT_EQ(f.direction(), Direction::nonincreasing);
  EXPECT_DOUBLE_EQ(f(0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(f(1), 2.0 / 3.0);

  const auto g = erm_geometric(counts1({0}));
  EXPECT_DOUBLE_EQ(g(0), 1.0);

  const auto p = erm_geometric_problem(counts1({0, 1, 2}));
  EXPECT_EQ(p.lin_coeffs, (std::vector<std::int64_t>{0, 0, 1}));
  EXPECT_EQ(p.direction, Direction::nonincreasing);
}

TEST(ErmGeometric, ZeroLinearTermsGiveZero) {
  isotonic::IntegerProblem p;
  p.positions = {0, 1, 2};
  p.quad_weights = {1, 1, 1};
  p.lin_coeffs = {0, 0, 0};
  p.direction = Direction::nonincreasing;
  EXPECT_EQ(isotonic::solve_stack(p).values(), (std::vector<double>{0, 0, 0}));
}

TEST(ErmGeometricProperty, MatchesComplementFormulation) {
  // g = 1 - f turns the nonincreasing problem into a nondecreasing one with
  // linear term N(x + 1) on the same quadratic weights.
  std::mt19937_64 gen(10);
  std::geometric_distribution<std::int64_t> geo(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::int64_t> xs(1 + trial % 60);
    for (auto& x : xs) x = geo(gen);
    const auto c = counts1(xs);
    const auto f = erm_geometric(c);
    const auto p = erm_geometric_problem(c);
    std::vector<double> v, w;
    for (auto a : p.positions) {
      v.push_back(static_cast<double>(c.count(a)));
      w.push_back(static_cast<double>(c.count(a + 1)));
    }
    const auto g = oracle::isotonic_minmax(v, w);
    for (std::size_t i = 0; i < p.positions.size(); ++i) {
      if (v[i] == 0) continue;  // value at a zero-weight position is not identified
      const double expect = std::clamp(1.0 - g[i], 0.0, 1.0);
      EXPECT_NEAR(f(p.positions[i]), expect, 1e-12) << "trial " << trial;
    }
    for (std::int64_t x = 0; x < 40; ++x) {
      EXPECT_GE(f(x), 0.0);
      EXPECT_LE(f(x), 1.0);
      EXPECT_GE(f(x), f(x + 1));
    }
  }
}

TEST(ErmNegBinomial, WorkedExamples) {
  const auto f = erm_negbinomial(counts1({0, 1}), 1.0);
  for (std::int64_t x = 0; x < 5; ++x) EXPECT_DOUBLE_EQ(f(x), 0.5);

  const auto z = erm_negbinomial(counts1({0, 0, 0}), 3.0);
  for (std::int64_t x = 0; x < 5; ++x) EXPECT_DOUBLE_EQ(z(x), 0.0);

  const auto c = counts1({0, 0, 1, 2});
  const auto p = erm_negbinomial_problem(c, 2.0);
  ASSERT_EQ(p.lin_coeffs.size(), 3u);
  EXPECT_DOUBLE_EQ(p.lin_coeffs[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(p.lin_coeffs[1], 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(p.lin_coeffs[2], 0.0);
  const auto g = erm_negbinomial(c, 2.0);
  const auto expect = oracle::isotonic_minmax({2, 1, 1}, {2.0 / 3.0, 3.0 / 4.0, 0.0});
  for (std::int64_t x = 0; x < 3; ++x) EXPECT_NEAR(g(x), expect[static_cast<std::size_t>(x)], 1e-15);
  EXPECT_NEAR(objective_value(p, isotonic::solve_oracle(p).values()),
              oracle::quadratic_objective({2, 1, 1}, {2.0 / 3.0, 3.0 / 4.0, 0.0}, expect), 1e-12);
}

TEST(ErmNegBinomial, RejectsBadShape) {
  EXPECT_THROW(erm_negbinomial(counts1({0, 1}), 0.0), ValidationError);
  EXPECT_THROW(erm_negbinomial(counts1({0, 1}), -1.0), ValidationError);
}

// -- dispatch -------------------------------------------------------------------

TEST(Fit, MethodNames) {
  for (auto m : {Method::robbins, Method::erm, Method::mono_robbins, Method::robbins_multi, Method::erm_multi,
                 Method::erm_geometric, Method::erm_negbinomial}) {
    EXPECT_EQ(method_from_string(to_string(m)), m);
  }
  try {
    method_from_string("npmle");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown method"), std::string::npos);
  }
}

TEST(Fit, DimensionSupport) {
  EXPECT_TRUE(supports_dimension(Method::erm, 1));
  EXPECT_FALSE(supports_dimension(Method::erm, 2));
  EXPECT_TRUE(supports_dimension(Method::erm_multi, 3));
  EXPECT_TRUE(supports_dimension(Method::robbins_multi, 2));
  EXPECT_FALSE(supports_dimension(Method::mono_robbins, 2));
  EXPECT_THROW(fit(Method::erm, tabulate(std::vector<LatticePoint>{{0, 1}})), ValidationError);
}

TEST(Fit, DispatchMatchesConstructors) {
  const auto c = counts1({0, 0, 1, 2, 4});
  const auto est = fit(Method::erm, c);
  const auto direct = erm_poisson(c);
  std::vector<double> out(1);
  for (std::int64_t x = 0; x < 8; ++x) {
    const std::vector<std::int64_t> p{x};
    EXPECT_DOUBLE_EQ(est.evaluate(p, 0), direct(x));
    est.evaluate(p, out);
    EXPECT_DOUBLE_EQ(out[0], direct(x));
  }
  EXPECT_EQ(fit(Method::erm_negbinomial, c, FitOptions{2.5}).nb_r(), 2.5);
}
