#include "ebayes/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ebayes/error.hpp"

namespace ebayes {

using isotonic::Direction;

// -- StepEstimator -----------------------------------------------------------

StepEstimator::StepEstimator(std::vector<Knot> knots, Direction direction, double below_min_value)
    : knots_(std::move(knots)), direction_(direction), below_min_value_(below_min_value) {
  if (knots_.empty()) throw ValidationError("step estimator needs at least one knot");
  if (!std::isfinite(below_min_value_)) throw ValidationError("below_min_value must be finite");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i].value)) throw ValidationError("knot values must be finite");
    if (knots_[i].position < 0) throw ValidationError("knot positions must be non-negative");
    if (i == 0) continue;
    if (knots_[i].position <= knots_[i - 1].position) {
      throw ValidationError("knot positions must be strictly increasing");
    }
    const bool ok = direction_ == Direction::nondecreasing ? knots_[i - 1].value <= knots_[i].value
                                                           : knots_[i - 1].value >= knots_[i].value;
    if (!ok) throw ValidationError(std::string("knot values must be ") + isotonic::to_string(direction_));
  }
}

double StepEstimator::operator()(std::int64_t x) const {
  if (x == -1) return 0.0;
  if (x < -1) throw ValidationError("step estimator is defined on Z_+ and -1 only");
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                             [](std::int64_t v, const Knot& k) { return v < k.position; });
  if (it == knots_.begin()) return below_min_value_;
  return std::prev(it)->value;
}

// -- MultiEstimator ----------------------------------------------------------

MultiEstimator::MultiEstimator(std::size_t dim, std::vector<ClassMap> per_coordinate)
    : dim_(dim), per_coordinate_(std::move(per_coordinate)) {
  if (dim_ == 0) throw ValidationError("dimension must be positive");
  if (per_coordinate_.size() != dim_) throw ValidationError("one class map per coordinate required");
  for (const auto& classes : per_coordinate_) {
    for (const auto& [key, est] : classes) {
      if (key.size() != dim_ - 1) throw ValidationError("class key must have d - 1 coordinates");
      if (est.direction() != Direction::nondecreasing) {
        throw ValidationError("multidimensional classes must be nondecreasing");
      }
    }
  }
}

MultiEstimator::ClassKey MultiEstimator::class_key(std::span<const std::int64_t> x, std::size_t j) {
  ClassKey key;
  key.reserve(x.size() - 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i != j) key.push_back(x[i]);
  }
  return key;
}

double MultiEstimator::evaluate(std::span<const std::int64_t> x, std::size_t j) const {
  if (x.size() != dim_ || j >= dim_) throw ValidationError("point dimension does not match estimator");
  if (x[j] == -1) return 0.0;  // f_j(x - e_j) at x_j = 0
  const auto& classes = per_coordinate_[j];
  auto it = classes.find(class_key(x, j));
  if (it == classes.end()) return 0.0;
  return it->second(x[j]);
}

// -- RobbinsEstimator --------------------------------------------------------

double RobbinsEstimator::evaluate(std::span<const std::int64_t> x, std::size_t j) const {
  if (x.size() != counts_.dim() || j >= counts_.dim()) {
    throw ValidationError("point dimension does not match estimator");
  }
  LatticePoint up(x.begin(), x.end());
  up[j] += 1;
  const auto n_up = counts_.count(up);
  if (n_up == 0) return 0.0;
  const auto n_here = counts_.count(x);
  return static_cast<double>(x[j] + 1) * static_cast<double>(n_up) / static_cast<double>(n_here + 1);
}

double RobbinsEstimator::operator()(std::int64_t x) const {
  const std::int64_t n_up = counts_.count(x + 1);
  if (n_up == 0) return 0.0;
  return static_cast<double>(x + 1) * static_cast<double>(n_up) /
         static_cast<double>(counts_.count(x) + 1);
}

// -- Method ------------------------------------------------------------------

namespace {

constexpr std::pair<Method, const char*> kMethodNames[] = {
    {Method::robbins, "robbins"},
    {Method::erm, "erm"},
    {Method::mono_robbins, "mono_robbins"},
    {Method::robbins_multi, "robbins_multi"},
    {Method::erm_multi, "erm_multi"},
    {Method::erm_geometric, "erm_geometric"},
    {Method::erm_negbinomial, "erm_negbinomial"},
};

}  // namespace

const char* to_string(Method m) noexcept {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  for (const auto& [method, label] : kMethodNames) {
    if (name == label) return method;
  }
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

bool is_poisson_method(Method m) noexcept {
  return m != Method::erm_geometric && m != Method::erm_negbinomial;
}

bool supports_dimension(Method m, std::size_t d) noexcept {
  if (d == 0) return false;
  return m == Method::robbins_multi || m == Method::erm_multi || d == 1;
}

// -- FittedEstimator ---------------------------------------------------------

FittedEstimator::FittedEstimator(Method method, std::size_t dim, Rule rule, double nb_r)
    : method_(method), dim_(dim), rule_(std::move(rule)), nb_r_(nb_r) {
  const std::size_t rule_dim = std::visit(
      [](const auto& r) -> std::size_t {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, StepEstimator>) {
          return 1;
        } else {
          return r.dim();
        }
      },
      rule_);
  if (rule_dim != dim_) throw ValidationError("rule dimension does not match estimator dimension");
  if (!supports_dimension(method_, dim_)) {
    throw ValidationError(std::string("method ") + to_string(method_) + " does not support d = " +
                          std::to_string(dim_));
  }
}

double FittedEstimator::evaluate(std::span<const std::int64_t> x, std::size_t j) const {
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, StepEstimator>) {
          if (x.size() != 1 || j != 0) throw ValidationError("point dimension does not match estimator");
          return r(x[0]);
        } else {
          return r.evaluate(x, j);
        }
      },
      rule_);
}

void FittedEstimator::evaluate(std::span<const std::int64_t> x, std::span<double> out) const {
  if (out.size() != dim_) throw ValidationError("output span must have d entries");
  for (std::size_t j = 0; j < dim_; ++j) out[j] = evaluate(x, j);
}

// -- problem construction ----------------------------------------------------

namespace {

using Line = std::vector<std::pair<std::int64_t, std::int64_t>>;  // (position, count), sorted

void require_one_dim(const EmpiricalCounts& counts, const char* who) {
  if (counts.dim() != 1) {
    throw ValidationError(std::string(who) + " requires d = 1, got d = " + std::to_string(counts.dim()));
  }
}

Line line_of(const EmpiricalCounts& counts) {
  Line line;
  line.reserve(counts.distinct());
  for (const auto& e : counts.entries()) line.emplace_back(e.point[0], e.count);
  return line;
}

std::int64_t count_on(const Line& line, std::int64_t a) {
  auto it = std::lower_bound(line.begin(), line.end(), a,
                             [](const auto& e, std::int64_t v) { return e.first < v; });
  return (it != line.end() && it->first == a) ? it->second : 0;
}

// S = {X_i} u {X_i - 1}, restricted to Z_+.
std::vector<std::int64_t> support_with_predecessors(const Line& line) {
  std::vector<std::int64_t> s;
  s.reserve(2 * line.size());
  for (const auto& [a, n] : line) {
    if (a >= 1 && (s.empty() || s.back() < a - 1)) s.push_back(a - 1);
    if (s.empty() || s.back() < a) s.push_back(a);
  }
  return s;
}

isotonic::IntegerProblem poisson_problem_on(const Line& line) {
  isotonic::IntegerProblem p;
  p.direction = Direction::nondecreasing;
  p.positions = support_with_predecessors(line);
  p.quad_weights.reserve(p.positions.size());
  p.lin_coeffs.reserve(p.positions.size());
  for (auto a : p.positions) {
    p.quad_weights.push_back(count_on(line, a));
    p.lin_coeffs.push_back((a + 1) * count_on(line, a + 1));
  }
  return p;
}

template <class Weight>
std::vector<Knot> knots_from(const isotonic::Problem<Weight>& p, const isotonic::BlockSolution<Weight>& sol) {
  std::vector<Knot> knots;
  knots.reserve(sol.blocks.size());
  for (const auto& b : sol.blocks) knots.push_back({p.positions[b.first], b.value});
  return knots;
}

// Drops knots that repeat the previous value (after clamping, say).
std::vector<Knot> compress(std::vector<Knot> knots) {
  std::vector<Knot> out;
  out.reserve(knots.size());
  for (const auto& k : knots) {
    if (out.empty() || out.back().value != k.value) out.push_back(k);
  }
  return out;
}

StepEstimator erm_on_line(const Line& line) {
  const auto problem = poisson_problem_on(line);
  const auto sol = isotonic::solve_stack(problem);
  return StepEstimator(knots_from(problem, sol), Direction::nondecreasing, 0.0);
}

}  // namespace

isotonic::IntegerProblem erm_poisson_problem(const EmpiricalCounts& counts) {
  require_one_dim(counts, "erm_poisson");
  return poisson_problem_on(line_of(counts));
}

isotonic::IntegerProblem erm_geometric_problem(const EmpiricalCounts& counts) {
  require_one_dim(counts, "erm_geometric");
  const Line line = line_of(counts);
  isotonic::IntegerProblem p;
  p.direction = Direction::nonincreasing;
  p.positions = support_with_predecessors(line);
  for (auto x : p.positions) {
    const auto here = count_on(line, x);
    p.quad_weights.push_back(here);
    p.lin_coeffs.push_back(here - count_on(line, x + 1));
  }
  return p;
}

isotonic::RealProblem erm_negbinomial_problem(const EmpiricalCounts& counts, double r) {
  require_one_dim(counts, "erm_negbinomial");
  if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("negative binomial shape r must be positive");
  const Line line = line_of(counts);
  isotonic::RealProblem p;
  p.direction = Direction::nondecreasing;
  p.positions = support_with_predecessors(line);
  for (auto x : p.positions) {
    const double xd = static_cast<double>(x);
    p.quad_weights.push_back(static_cast<double>(count_on(line, x)));
    p.lin_coeffs.push_back((xd + 2.0) / (xd + 1.0 + r) * static_cast<double>(count_on(line, x + 1)));
  }
  return p;
}

isotonic::RealProblem monotone_robbins_problem(const EmpiricalCounts& counts) {
  require_one_dim(counts, "monotone_robbins");
  const RobbinsEstimator rob(counts);
  isotonic::RealProblem p;
  p.direction = Direction::nondecreasing;
  for (const auto& e : counts.entries()) {
    const auto x = e.point[0];
    const double n = static_cast<double>(e.count);
    p.positions.push_back(x);
    p.quad_weights.push_back(n);
    p.lin_coeffs.push_back(n * rob(x));
  }
  return p;
}

RobbinsEstimator robbins(const EmpiricalCounts& counts) {
  require_one_dim(counts, "robbins");
  return RobbinsEstimator(counts);
}

RobbinsEstimator robbins_multi(const EmpiricalCounts& counts) { return RobbinsEstimator(counts); }

StepEstimator erm_poisson(const EmpiricalCounts& counts) {
  require_one_dim(counts, "erm_poisson");
  return erm_on_line(line_of(counts));
}

StepEstimator monotone_robbins(const EmpiricalCounts& counts) {
  const auto problem = monotone_robbins_problem(counts);
  const auto sol = isotonic::solve_stack(problem);
  return StepEstimator(knots_from(problem, sol), Direction::nondecreasing, 0.0);
}

StepEstimator erm_geometric(const EmpiricalCounts& counts) {
  const auto problem = erm_geometric_problem(counts);
  const auto sol = isotonic::solve_stack(problem);
  auto knots = knots_from(problem, sol);
  for (auto& k : knots) k.value = std::clamp(k.value, 0.0, 1.0);
  knots = compress(std::move(knots));
  // Extending the first value backwards keeps the rule nonincreasing on Z_+.
  const double head = knots.front().value;
  return StepEstimator(std::move(knots), Direction::nonincreasing, head);
}

StepEstimator erm_negbinomial(const EmpiricalCounts& counts, double r) {
  const auto problem = erm_negbinomial_problem(counts, r);
  const auto sol = isotonic::solve_stack(problem);
  return StepEstimator(knots_from(problem, sol), Direction::nondecreasing, 0.0);
}

MultiEstimator erm_poisson_multi(const EmpiricalCounts& counts) {
  const std::size_t d = counts.dim();
  std::vector<MultiEstimator::ClassMap> per_coordinate(d);
  for (std::size_t j = 0; j < d; ++j) {
    std::map<MultiEstimator::ClassKey, Line> lines;
    for (const auto& e : counts.entries()) {
      lines[MultiEstimator::class_key(e.point, j)].emplace_back(e.point[j], e.count);
    }
    for (auto& [key, line] : lines) {
      std::sort(line.begin(), line.end());
      per_coordinate[j].emplace(key, erm_on_line(line));
    }
  }
  return MultiEstimator(d, std::move(per_coordinate));
}

FittedEstimator fit(Method method, const EmpiricalCounts& counts, const FitOptions& options) {
  const std::size_t d = counts.dim();
  if (!supports_dimension(method, d)) {
    throw ValidationError(std::string("method ") + to_string(method) + " does not support d = " +
                          std::to_string(d));
  }
  switch (method) {
    case Method::robbins:
      return FittedEstimator(method, d, robbins(counts));
    case Method::erm:
      return FittedEstimator(method, d, erm_poisson(counts));
    case Method::mono_robbins:
      return FittedEstimator(method, d, monotone_robbins(counts));
    case Method::robbins_multi:
      return FittedEstimator(method, d, robbins_multi(counts));
    case Method::erm_multi:
      return FittedEstimator(method, d, erm_poisson_multi(counts));
    case Method::erm_geometric:
      return FittedEstimator(method, d, erm_geometric(counts));
    case Method::erm_negbinomial:
      return FittedEstimator(method, d, erm_negbinomial(counts, options.nb_r), options.nb_r);
  }
  throw ValidationError("unknown method");
}

}  // namespace ebayes
