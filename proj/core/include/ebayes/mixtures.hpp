#pragma once

// Priors on Poisson means, their exact mixture pmfs and Bayes rules, and
// reproducible sampling from the hierarchical model
//
//     theta_i ~ prior,   X_ij | theta_i ~ Poisson(theta_ij) independently.
//
// Every oracle quantity (pmf, posterior mean, mmse) is computed from a
// DiscretePrior. Parametric priors are reduced to one by quadrature; the
// closed forms for the uniform and exponential cases are kept as independent
// checks in the tests.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ebayes/counts.hpp"

namespace ebayes {

/// Finite mixture of point masses in R_+^d. `atoms` is row-major (M x dim).
struct DiscreteAtoms {
  std::size_t dim = 1;
  std::vector<double> atoms;
  std::vector<double> probabilities;
};

struct UniformInterval {
  double low = 0.0;
  double high = 1.0;
};

struct ExponentialRate {
  double rate = 1.0;
};

/// Uniform distribution on a triangle in R_+^2.
struct TriangleUniform {
  std::array<std::array<double, 2>, 3> vertices{};
};

class Prior;

/// Independent coordinates, each a one-dimensional prior.
struct ProductPrior {
  std::vector<Prior> factors;
};

class Prior {
public:
  using Variant = std::variant<DiscreteAtoms, UniformInterval, ExponentialRate, TriangleUniform, ProductPrior>;

  /// Validates; throws ValidationError naming the violated invariant.
  Prior(Variant v);
  Prior(DiscreteAtoms v) : Prior(Variant(std::move(v))) {}
  Prior(UniformInterval v) : Prior(Variant(v)) {}
  Prior(ExponentialRate v) : Prior(Variant(v)) {}
  Prior(TriangleUniform v) : Prior(Variant(v)) {}
  Prior(ProductPrior v) : Prior(Variant(std::move(v))) {}

  std::size_t dim() const noexcept { return dim_; }
  const Variant& variant() const noexcept { return v_; }
  /// Short human-readable description, e.g. "exponential(rate=2)".
  std::string describe() const;

private:
  Variant v_;
  std::size_t dim_ = 1;
};

/// Finite-support prior used by every oracle computation. Either an explicit
/// atom list, or a product of one-dimensional DiscretePriors kept in factored
/// form (pmf and posterior mean factorize, so no atom grid is materialized).
class DiscretePrior {
public:
  struct Provenance {
    std::string source;      // description of the prior this was built from
    std::size_t nodes = 0;   // quadrature nodes (product of factor nodes for products)
  };

  DiscretePrior(std::size_t dim, std::vector<double> atoms, std::vector<double> probabilities,
                Provenance provenance);
  DiscretePrior(std::size_t dim, std::vector<double> atoms, std::vector<double> probabilities)
      : DiscretePrior(dim, std::move(atoms), std::move(probabilities), Provenance{}) {}

  static DiscretePrior product(std::vector<DiscretePrior> factors, std::string source = {});

  std::size_t dim() const noexcept { return dim_; }
  bool is_product() const noexcept { return !factors_.empty(); }
  const std::vector<DiscretePrior>& factors() const noexcept { return factors_; }
  /// Number of atoms (the product of factor sizes for a factored prior).
  double size() const noexcept;
  const Provenance& provenance() const noexcept { return provenance_; }

  /// Explicit atoms; empty for a factored prior (see materialize()).
  const std::vector<double>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }

  /// Expand a factored prior into explicit atoms. Throws SizeError when the
  /// atom count would exceed node_cap.
  DiscretePrior materialize(std::size_t node_cap = 1'000'000) const;

  /// E ||theta||^2.
  double second_moment() const;
  /// E theta_j.
  double mean(std::size_t j) const;

private:
  DiscretePrior() = default;

  std::size_t dim_ = 1;
  std::vector<double> atoms_;
  std::vector<double> probabilities_;
  std::vector<DiscretePrior> factors_;
  Provenance provenance_;
};

struct QuadratureOptions {
  /// Parametric priors with unbounded support are truncated at quantile
  /// 1 - tol * 1e-3 before integration. Must lie in (0, 1e-3].
  double tol = 1e-15;
  /// Composite Gauss-Legendre: panels x 8 nodes for 1-d parametric priors.
  std::size_t panels = 256;
  /// Triangles are cut into subdivisions^2 congruent cells.
  std::size_t triangle_subdivisions = 64;
};

/// Reduce a prior to finite support. Discrete priors pass through unchanged.
DiscretePrior discretize(const Prior& prior, const QuadratureOptions& options = {});

/// p_pi(x) = sum_m p_m prod_i exp(-theta_mi) theta_mi^x_i / x_i!, per atom in log space.
double mixture_pmf(const DiscretePrior& prior, std::span<const std::int64_t> x);

/// Direct posterior mean E[theta_j | X = x]; 0 where p_pi(x) = 0.
double posterior_mean(const DiscretePrior& prior, std::span<const std::int64_t> x, std::size_t j);

struct TruncationPolicy {
  double tail_tol = 1e-12;
  std::int64_t max_side = 1'000'000;
};

/// pmf and Bayes rule f*_j(x) = (x_j + 1) p(x + e_j) / p(x) on the box
/// [0, L_1] x ... x [0, L_d], where each L_i is the smallest bound whose
/// marginal tail is <= tail_tol / d (so the box holds mass >= 1 - tail_tol).
class MixtureTable {
public:
  MixtureTable(std::vector<std::int64_t> extents, std::vector<double> pmf, std::vector<double> bayes,
               double second_moment, double tail_tol);

  std::size_t dim() const noexcept { return extents_.size(); }
  /// Number of lattice values per coordinate (L_i + 1).
  const std::vector<std::int64_t>& extents() const noexcept { return extents_; }
  std::size_t num_points() const noexcept { return pmf_.size(); }
  double captured_mass() const noexcept { return captured_mass_; }
  double tail_tol() const noexcept { return tail_tol_; }
  /// E ||theta||^2 under the (discretized) prior.
  double second_moment() const noexcept { return second_moment_; }

  bool contains(std::span<const std::int64_t> x) const noexcept;
  std::size_t index_of(std::span<const std::int64_t> x) const;
  LatticePoint point(std::size_t index) const;

  double pmf(std::size_t index) const { return pmf_[index]; }
  double bayes(std::size_t index, std::size_t j) const { return bayes_[index * dim() + j]; }
  const std::vector<double>& pmf_values() const noexcept { return pmf_; }

private:
  std::vector<std::int64_t> extents_;
  std::vector<double> pmf_;
  std::vector<double> bayes_;
  double second_moment_;
  double tail_tol_;
  double captured_mass_ = 0.0;
};

MixtureTable bayes_estimator(const DiscretePrior& prior, const TruncationPolicy& policy = {});

/// Latent means and observations, both row-major n x d.
struct SampleDraw {
  std::size_t dim = 1;
  std::vector<double> thetas;
  std::vector<std::int64_t> observations;

  std::size_t size() const noexcept { return dim == 0 ? 0 : observations.size() / dim; }
};

/// Draw n pairs from the exact prior (not its quadrature). Deterministic in seed.
SampleDraw sample(const Prior& prior, std::size_t n, std::uint64_t seed);

}  // namespace ebayes
