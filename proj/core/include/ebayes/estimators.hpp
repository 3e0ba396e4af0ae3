#pragma once

// Empirical-Bayes decision rules for Poisson (and geometric / negative
// binomial) mixtures, built from empirical counts.
//
// The ERM rules minimize the empirical surrogate of the squared-error risk
// over monotone functions,
//
//     E_n[ f(X)^2 - 2 X f(X - 1) ],
//
// which, after tabulating the sample, is an isotonic problem over the
// positions S = {X_i} u {X_i - 1} with v(a) = N(a), w(a) = (a + 1) N(a + 1).

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "ebayes/counts.hpp"
#include "ebayes/isotonic.hpp"

namespace ebayes {

struct Knot {
  std::int64_t position = 0;
  double value = 0.0;
  bool operator==(const Knot&) const = default;
};

/// Monotone piecewise-constant function on Z_+.
///
/// f(x) is the value of the nearest knot at or below x, `below_min_value`
/// below the first knot, and 0 at x = -1.
class StepEstimator {
public:
  StepEstimator(std::vector<Knot> knots, isotonic::Direction direction, double below_min_value = 0.0);

  double operator()(std::int64_t x) const;

  const std::vector<Knot>& knots() const noexcept { return knots_; }
  isotonic::Direction direction() const noexcept { return direction_; }
  double below_min_value() const noexcept { return below_min_value_; }

  bool operator==(const StepEstimator&) const = default;

private:
  std::vector<Knot> knots_;
  isotonic::Direction direction_;
  double below_min_value_;
};

/// d-dimensional rule whose j-th coordinate is a StepEstimator along e_j on
/// every populated class (line) C_j(x'), and 0 off those lines.
class MultiEstimator {
public:
  using ClassKey = LatticePoint;  // x with coordinate j removed
  using ClassMap = std::map<ClassKey, StepEstimator>;

  MultiEstimator(std::size_t dim, std::vector<ClassMap> per_coordinate);

  std::size_t dim() const noexcept { return dim_; }
  double evaluate(std::span<const std::int64_t> x, std::size_t j) const;
  const ClassMap& classes(std::size_t j) const { return per_coordinate_.at(j); }

  static ClassKey class_key(std::span<const std::int64_t> x, std::size_t j);

  bool operator==(const MultiEstimator&) const = default;

private:
  std::size_t dim_;
  std::vector<ClassMap> per_coordinate_;
};

/// Closed-form Robbins rule f_j(x) = (x_j + 1) N(x + e_j) / (N(x) + 1),
/// evaluable at any lattice point.
class RobbinsEstimator {
public:
  explicit RobbinsEstimator(EmpiricalCounts counts) : counts_(std::move(counts)) {}

  std::size_t dim() const noexcept { return counts_.dim(); }
  double evaluate(std::span<const std::int64_t> x, std::size_t j) const;
  double operator()(std::int64_t x) const;  // d = 1
  const EmpiricalCounts& counts() const noexcept { return counts_; }

  bool operator==(const RobbinsEstimator&) const = default;

private:
  EmpiricalCounts counts_;
};

enum class Method {
  robbins,
  erm,
  mono_robbins,
  robbins_multi,
  erm_multi,
  erm_geometric,
  erm_negbinomial,
};

const char* to_string(Method m) noexcept;
/// Throws ValidationError("unknown method '...'").
Method method_from_string(std::string_view name);
/// Methods that estimate Poisson means (and so can be scored against a Poisson mixture).
bool is_poisson_method(Method m) noexcept;
/// Whether the method accepts data of dimension d.
bool supports_dimension(Method m, std::size_t d) noexcept;

/// A fitted rule of any kind, evaluable coordinate-wise.
class FittedEstimator {
public:
  using Rule = std::variant<StepEstimator, MultiEstimator, RobbinsEstimator>;

  FittedEstimator(Method method, std::size_t dim, Rule rule, double nb_r = 0.0);

  Method method() const noexcept { return method_; }
  std::size_t dim() const noexcept { return dim_; }
  const Rule& rule() const noexcept { return rule_; }
  /// Shape parameter r for erm_negbinomial, 0 otherwise.
  double nb_r() const noexcept { return nb_r_; }

  double evaluate(std::span<const std::int64_t> x, std::size_t j) const;
  void evaluate(std::span<const std::int64_t> x, std::span<double> out) const;

  bool operator==(const FittedEstimator&) const = default;

private:
  Method method_;
  std::size_t dim_;
  Rule rule_;
  double nb_r_;
};

// -- isotonic problems induced by a sample (d = 1) -------------------------

/// Positions {a >= 0 : N(a) > 0 or N(a + 1) > 0}, v = N(a), w = (a + 1) N(a + 1).
isotonic::IntegerProblem erm_poisson_problem(const EmpiricalCounts& counts);
/// Same positions, v = N(x), w = N(x) - N(x + 1), nonincreasing.
isotonic::IntegerProblem erm_geometric_problem(const EmpiricalCounts& counts);
/// Same positions, v = N(x), w = ((x + 2) / (x + 1 + r)) N(x + 1).
isotonic::RealProblem erm_negbinomial_problem(const EmpiricalCounts& counts, double r);
/// Observed x only, v = N(x), w = N(x) f_Rob(x).
isotonic::RealProblem monotone_robbins_problem(const EmpiricalCounts& counts);

// -- constructors ------------------------------------------------------------

RobbinsEstimator robbins(const EmpiricalCounts& counts);
StepEstimator erm_poisson(const EmpiricalCounts& counts);
StepEstimator monotone_robbins(const EmpiricalCounts& counts);
MultiEstimator erm_poisson_multi(const EmpiricalCounts& counts);
RobbinsEstimator robbins_multi(const EmpiricalCounts& counts);
/// Solved over nonincreasing functions, values clamped to [0, 1].
StepEstimator erm_geometric(const EmpiricalCounts& counts);
StepEstimator erm_negbinomial(const EmpiricalCounts& counts, double r);

struct FitOptions {
  double nb_r = 1.0;
};

FittedEstimator fit(Method method, const EmpiricalCounts& counts, const FitOptions& options = {});

}  // namespace ebayes
