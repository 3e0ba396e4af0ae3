#include "ebayes/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "ebayes/error.hpp"
#include "ebayes/number_format.hpp"
#include "ebayes/random.hpp"

namespace ebayes {

namespace {

constexpr double kProbabilityTolerance = 1e-12;

void validate_atoms(std::size_t dim, const std::vector<double>& atoms, const std::vector<double>& probs) {
  if (dim == 0) throw ValidationError("prior dimension must be positive");
  if (probs.empty()) throw ValidationError("discrete prior needs at least one atom");
  if (atoms.size() != probs.size() * dim) {
    throw ValidationError("discrete prior: atoms must have " + std::to_string(dim) + " coordinates each");
  }
  for (double a : atoms) {
    if (!std::isfinite(a) || a < 0.0) throw ValidationError("discrete prior: atoms must be finite and >= 0");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw ValidationError("discrete prior: probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw ValidationError("discrete prior: probabilities must sum to 1 (got " + format_double(total) + ")");
  }
}

double triangle_area(const TriangleUniform& t) {
  const auto& [a, b, c] = t.vertices;
  return 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

}  // namespace

// -- Prior -------------------------------------------------------------------

Prior::Prior(Variant v) : v_(std::move(v)) {
  std::visit(
      [this](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DiscreteAtoms>) {
          validate_atoms(p.dim, p.atoms, p.probabilities);
          dim_ = p.dim;
        } else if constexpr (std::is_same_v<T, UniformInterval>) {
          if (!std::isfinite(p.low) || !std::isfinite(p.high) || p.low < 0.0 || !(p.low < p.high)) {
            throw ValidationError("uniform prior requires 0 <= low < high");
          }
          dim_ = 1;
        } else if constexpr (std::is_same_v<T, ExponentialRate>) {
          if (!std::isfinite(p.rate) || !(p.rate > 0.0)) throw ValidationError("exponential prior requires rate > 0");
          dim_ = 1;
        } else if constexpr (std::is_same_v<T, TriangleUniform>) {
          for (const auto& v : p.vertices) {
            for (double c : v) {
              if (!std::isfinite(c) || c < 0.0) throw ValidationError("triangle vertices must be finite and >= 0");
            }
          }
          if (!(triangle_area(p) > 1e-12)) throw ValidationError("triangle prior is degenerate (zero area)");
          dim_ = 2;
        } else {
          if (p.factors.empty()) throw ValidationError("product prior needs at least one factor");
          for (const auto& f : p.factors) {
            if (f.dim() != 1) throw ValidationError("product prior factors must be one-dimensional");
          }
          dim_ = p.factors.size();
        }
      },
      v_);
}

std::string Prior::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DiscreteAtoms>) {
          os << "discrete(atoms=" << p.probabilities.size() << ",d=" << p.dim << ")";
        } else if constexpr (std::is_same_v<T, UniformInterval>) {
          os << "uniform(" << format_double(p.low) << "," << format_double(p.high) << ")";
        } else if constexpr (std::is_same_v<T, ExponentialRate>) {
          os << "exponential(rate=" << format_double(p.rate) << ")";
        } else if constexpr (std::is_same_v<T, TriangleUniform>) {
          os << "triangle(";
          for (std::size_t i = 0; i < 3; ++i) {
            os << (i ? "," : "") << "(" << format_double(p.vertices[i][0]) << ","
               << format_double(p.vertices[i][1]) << ")";
          }
          os << ")";
        } else {
          os << "product(";
          for (std::size_t i = 0; i < p.factors.size(); ++i) os << (i ? "," : "") << p.factors[i].describe();
          os << ")";
        }
      },
      v_);
  return os.str();
}

// -- DiscretePrior -----------------------------------------------------------

DiscretePrior::DiscretePrior(std::size_t dim, std::vector<double> atoms, std::vector<double> probabilities,
                             Provenance provenance)
    : dim_(dim), atoms_(std::move(atoms)), probabilities_(std::move(probabilities)),
      provenance_(std::move(provenance)) {
  validate_atoms(dim_, atoms_, probabilities_);
  if (provenance_.source.empty()) provenance_.source = "discrete";
  if (provenance_.nodes == 0) provenance_.nodes = probabilities_.size();
}

DiscretePrior DiscretePrior::product(std::vector<DiscretePrior> factors, std::string source) {
  if (factors.empty()) throw ValidationError("product prior needs at least one factor");
  DiscretePrior out;
  out.dim_ = 0;
  std::size_t nodes = 1;
  for (const auto& f : factors) {
    if (f.dim() != 1 || f.is_product()) throw ValidationError("product factors must be one-dimensional");
    out.dim_ += 1;
    nodes *= f.probabilities().size();
  }
  out.factors_ = std::move(factors);
  out.provenance_ = {source.empty() ? std::string("product") : std::move(source), nodes};
  return out;
}

double DiscretePrior::size() const noexcept {
  if (!is_product()) return static_cast<double>(probabilities_.size());
  double s = 1.0;
  for (const auto& f : factors_) s *= static_cast<double>(f.probabilities().size());
  return s;
}

DiscretePrior DiscretePrior::materialize(std::size_t node_cap) const {
  if (!is_product()) return *this;
  if (size() > static_cast<double>(node_cap)) {
    throw SizeError("product quadrature has " + format_double(size()) + " nodes, above the cap of " +
                    std::to_string(node_cap));
  }
  std::vector<double> atoms{};
  std::vector<double> probs{1.0};
  std::size_t width = 0;
  for (const auto& f : factors_) {
    std::vector<double> next_atoms;
    std::vector<double> next_probs;
    const auto& fa = f.atoms();
    const auto& fp = f.probabilities();
    for (std::size_t m = 0; m < probs.size(); ++m) {
      for (std::size_t k = 0; k < fp.size(); ++k) {
        next_atoms.insert(next_atoms.end(), atoms.begin() + static_cast<std::ptrdiff_t>(m * width),
                          atoms.begin() + static_cast<std::ptrdiff_t>((m + 1) * width));
        next_atoms.push_back(fa[k]);
        next_probs.push_back(probs[m] * fp[k]);
      }
    }
    atoms = std::move(next_atoms);
    probs = std::move(next_probs);
    width += 1;
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (auto& p : probs) p /= total;
  return DiscretePrior(dim_, std::move(atoms), std::move(probs), provenance_);
}

double DiscretePrior::mean(std::size_t j) const {
  if (j >= dim_) throw ValidationError("coordinate out of range");
  if (is_product()) return factors_[j].mean(0);
  double m = 0.0;
  for (std::size_t a = 0; a < probabilities_.size(); ++a) m += probabilities_[a] * atoms_[a * dim_ + j];
  return m;
}

double DiscretePrior::second_moment() const {
  if (is_product()) {
    double s = 0.0;
    for (const auto& f : factors_) s += f.second_moment();
    return s;
  }
  double s = 0.0;
  for (std::size_t a = 0; a < probabilities_.size(); ++a) {
    for (std::size_t j = 0; j < dim_; ++j) {
      const double t = atoms_[a * dim_ + j];
      s += probabilities_[a] * t * t;
    }
  }
  return s;
}

// -- quadrature --------------------------------------------------------------

namespace {

struct Nodes {
  std::vector<double> x;
  std::vector<double> w;
};

// Composite 8-point Gauss-Legendre on [lo, hi].
Nodes gauss_legendre(double lo, double hi, std::size_t panels) {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  std::vector<double> ref_x, ref_w;
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    ref_x.push_back(-abscissa[i]);
    ref_w.push_back(weights[i]);
    ref_x.push_back(abscissa[i]);
    ref_w.push_back(weights[i]);
  }
  std::vector<std::size_t> order(ref_x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ref_x[a] < ref_x[b]; });

  Nodes out;
  const double width = (hi - lo) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = lo + width * static_cast<double>(p);
    const double mid = a + 0.5 * width;
    for (auto i : order) {
      out.x.push_back(mid + 0.5 * width * ref_x[i]);
      out.w.push_back(0.5 * width * ref_w[i]);
    }
  }
  return out;
}

DiscretePrior from_density(const Nodes& nodes, const std::vector<double>& density, std::string source) {
  std::vector<double> probs(nodes.x.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = nodes.w[i] * density[i];
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (auto& p : probs) p /= total;
  return DiscretePrior(1, nodes.x, std::move(probs), {std::move(source), nodes.x.size()});
}

DiscretePrior discretize_impl(const Prior& prior, const QuadratureOptions& options) {
  return std::visit(
      [&](const auto& p) -> DiscretePrior {
        using T = std::decay_t<decltype(p)>;
        const std::string source = prior.describe();
        if constexpr (std::is_same_v<T, DiscreteAtoms>) {
          return DiscretePrior(p.dim, p.atoms, p.probabilities, {source, p.probabilities.size()});
        } else if constexpr (std::is_same_v<T, UniformInterval>) {
          const Nodes nodes = gauss_legendre(p.low, p.high, options.panels);
          return from_density(nodes, std::vector<double>(nodes.x.size(), 1.0), source);
        } else if constexpr (std::is_same_v<T, ExponentialRate>) {
          const double hi = -std::log(options.tol * 1e-3) / p.rate;
          const Nodes nodes = gauss_legendre(0.0, hi, options.panels);
          std::vector<double> density(nodes.x.size());
          for (std::size_t i = 0; i < density.size(); ++i) density[i] = std::exp(-p.rate * nodes.x[i]);
          return from_density(nodes, density, source);
        } else if constexpr (std::is_same_v<T, TriangleUniform>) {
          // Barycentric grid: K^2 congruent cells, one atom at each centroid.
          const std::size_t k = options.triangle_subdivisions;
          const auto& [v0, v1, v2] = p.vertices;
          std::vector<double> atoms;
          atoms.reserve(2 * k * k);
          auto emit = [&](double s, double t) {
            for (std::size_t c = 0; c < 2; ++c) {
              atoms.push_back(std::max(0.0, v0[c] + s * (v1[c] - v0[c]) + t * (v2[c] - v0[c])));
            }
          };
          const double kd = static_cast<double>(k);
          for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; i + j < k; ++j) {
              emit((static_cast<double>(i) + 1.0 / 3.0) / kd, (static_cast<double>(j) + 1.0 / 3.0) / kd);
              if (i + j + 1 < k) {
                emit((static_cast<double>(i) + 2.0 / 3.0) / kd, (static_cast<double>(j) + 2.0 / 3.0) / kd);
              }
            }
          }
          const std::size_t cells = atoms.size() / 2;
          std::vector<double> probs(cells, 1.0 / static_cast<double>(cells));
          return DiscretePrior(2, std::move(atoms), std::move(probs), {source, cells});
        } else {
          std::vector<DiscretePrior> factors;
          for (const auto& f : p.factors) factors.push_back(discretize_impl(f, options));
          return DiscretePrior::product(std::move(factors), source);
        }
      },
      prior.variant());
}

}  // namespace

DiscretePrior discretize(const Prior& prior, const QuadratureOptions& options) {
  if (!(options.tol > 0.0) || options.tol > 1e-3) throw ValidationError("quadrature tol must lie in (0, 1e-3]");
  if (options.panels * 8 < 2048) throw ValidationError("quadrature needs at least 2048 nodes");
  if (options.triangle_subdivisions * options.triangle_subdivisions < 4096) {
    throw ValidationError("triangle quadrature needs at least 2^12 cells");
  }
  return discretize_impl(prior, options);
}

// -- pmf ---------------------------------------------------------------------

namespace {

double log_poisson(double theta, std::int64_t x) {
  if (theta == 0.0) return x == 0 ? 0.0 : -INFINITY;
  const double xd = static_cast<double>(x);
  return -theta + xd * std::log(theta) - std::lgamma(xd + 1.0);
}

// Row-major (atoms x (L + 1)) table of Poisson pmfs for one coordinate.
std::vector<double> poisson_table(const DiscretePrior& prior, std::size_t j, std::int64_t max_x) {
  const std::size_t m = prior.probabilities().size();
  const std::size_t width = static_cast<std::size_t>(max_x) + 1;
  std::vector<double> lgam(width);
  for (std::size_t x = 0; x < width; ++x) lgam[x] = std::lgamma(static_cast<double>(x) + 1.0);
  std::vector<double> table(m * width);
  for (std::size_t a = 0; a < m; ++a) {
    const double theta = prior.atoms()[a * prior.dim() + j];
    double* row = table.data() + a * width;
    if (theta == 0.0) {
      row[0] = 1.0;
      continue;
    }
    const double lt = std::log(theta);
    for (std::size_t x = 0; x < width; ++x) row[x] = std::exp(static_cast<double>(x) * lt - theta - lgam[x]);
  }
  return table;
}

}  // namespace

double mixture_pmf(const DiscretePrior& prior, std::span<const std::int64_t> x) {
  if (x.size() != prior.dim()) throw ValidationError("point dimension does not match prior");
  for (auto c : x) {
    if (c < 0) return 0.0;
  }
  if (prior.is_product()) {
    double p = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) p *= mixture_pmf(prior.factors()[j], x.subspan(j, 1));
    return p;
  }
  const std::size_t d = prior.dim();
  double total = 0.0;
  for (std::size_t a = 0; a < prior.probabilities().size(); ++a) {
    double lp = 0.0;
    for (std::size_t j = 0; j < d; ++j) lp += log_poisson(prior.atoms()[a * d + j], x[j]);
    if (lp > -INFINITY) total += prior.probabilities()[a] * std::exp(lp);
  }
  return total;
}

double posterior_mean(const DiscretePrior& prior, std::span<const std::int64_t> x, std::size_t j) {
  if (x.size() != prior.dim() || j >= prior.dim()) throw ValidationError("point dimension does not match prior");
  if (prior.is_product()) return posterior_mean(prior.factors()[j], x.subspan(j, 1), 0);
  const std::size_t d = prior.dim();
  double num = 0.0, den = 0.0;
  for (std::size_t a = 0; a < prior.probabilities().size(); ++a) {
    double lp = 0.0;
    for (std::size_t i = 0; i < d; ++i) lp += log_poisson(prior.atoms()[a * d + i], x[i]);
    if (lp == -INFINITY) continue;
    const double w = prior.probabilities()[a] * std::exp(lp);
    den += w;
    num += w * prior.atoms()[a * d + j];
  }
  return den > 0.0 ? num / den : 0.0;
}

// -- MixtureTable ------------------------------------------------------------

MixtureTable::MixtureTable(std::vector<std::int64_t> extents, std::vector<double> pmf, std::vector<double> bayes,
                           double second_moment, double tail_tol)
    : extents_(std::move(extents)), pmf_(std::move(pmf)), bayes_(std::move(bayes)),
      second_moment_(second_moment), tail_tol_(tail_tol) {
  if (extents_.empty()) throw ValidationError("mixture table needs at least one coordinate");
  std::size_t points = 1;
  for (auto e : extents_) {
    if (e < 1) throw ValidationError("mixture table extents must be positive");
    points *= static_cast<std::size_t>(e);
  }
  if (pmf_.size() != points || bayes_.size() != points * extents_.size()) {
    throw ValidationError("mixture table arrays do not match extents");
  }
  for (double p : pmf_) {
    if (!(p >= 0.0)) throw ValidationError("pmf values must be >= 0");
  }
  for (double b : bayes_) {
    if (!(b >= 0.0)) throw ValidationError("Bayes values must be >= 0");
  }
  captured_mass_ = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
}

bool MixtureTable::contains(std::span<const std::int64_t> x) const noexcept {
  if (x.size() != dim()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < 0 || x[j] >= extents_[j]) return false;
  }
  return true;
}

std::size_t MixtureTable::index_of(std::span<const std::int64_t> x) const {
  if (!contains(x)) throw ValidationError("point outside the mixture table");
  std::size_t idx = 0;
  for (std::size_t j = 0; j < x.size(); ++j) idx = idx * static_cast<std::size_t>(extents_[j]) + static_cast<std::size_t>(x[j]);
  return idx;
}

LatticePoint MixtureTable::point(std::size_t index) const {
  LatticePoint x(dim());
  for (std::size_t j = dim(); j-- > 0;) {
    const auto e = static_cast<std::size_t>(extents_[j]);
    x[j] = static_cast<std::int64_t>(index % e);
    index /= e;
  }
  return x;
}

namespace {

// Smallest L with P(X_j > L) <= tail for the j-th marginal.
std::int64_t marginal_bound(const DiscretePrior& prior, std::size_t j, double tail, std::int64_t max_side) {
  const std::size_t m = prior.probabilities().size();
  std::vector<double> log_theta(m);
  double cdf = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    const double theta = prior.atoms()[a * prior.dim() + j];
    log_theta[a] = theta > 0.0 ? std::log(theta) : -INFINITY;
  }
  for (std::int64_t x = 0; x < max_side; ++x) {
    double px = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      const double theta = prior.atoms()[a * prior.dim() + j];
      double t;
      if (x == 0) {
        t = std::exp(-theta);
      } else if (theta == 0.0) {
        t = 0.0;
      } else {
        t = std::exp(static_cast<double>(x) * log_theta[a] - theta - std::lgamma(static_cast<double>(x) + 1.0));
      }
      px += prior.probabilities()[a] * t;
    }
    cdf += px;
    if (1.0 - cdf <= tail) return x;
  }
  throw SizeError("mixture truncation exceeds the lattice side cap of " + std::to_string(max_side));
}

MixtureTable table_for_atoms(const DiscretePrior& prior, const TruncationPolicy& policy) {
  const std::size_t d = prior.dim();
  const std::size_t m = prior.probabilities().size();
  std::vector<std::int64_t> extents(d);
  std::vector<std::vector<double>> tables(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto bound = marginal_bound(prior, j, policy.tail_tol / static_cast<double>(d), policy.max_side);
    extents[j] = bound + 1;
    tables[j] = poisson_table(prior, j, bound);
  }
  std::size_t points = 1;
  for (auto e : extents) points *= static_cast<std::size_t>(e);

  std::vector<double> pmf(points, 0.0), bayes(points * d, 0.0);
  std::vector<std::size_t> coord(d, 0);
  std::vector<double> num(d);
  for (std::size_t idx = 0; idx < points; ++idx) {
    double den = 0.0;
    std::fill(num.begin(), num.end(), 0.0);
    for (std::size_t a = 0; a < m; ++a) {
      double w = prior.probabilities()[a];
      for (std::size_t j = 0; j < d && w > 0.0; ++j) {
        w *= tables[j][a * static_cast<std::size_t>(extents[j]) + coord[j]];
      }
      if (w == 0.0) continue;
      den += w;
      for (std::size_t j = 0; j < d; ++j) num[j] += w * prior.atoms()[a * d + j];
    }
    pmf[idx] = den;
    for (std::size_t j = 0; j < d; ++j) bayes[idx * d + j] = den > 0.0 ? num[j] / den : 0.0;
    for (std::size_t j = d; j-- > 0;) {
      if (++coord[j] < static_cast<std::size_t>(extents[j])) break;
      coord[j] = 0;
    }
  }
  return MixtureTable(std::move(extents), std::move(pmf), std::move(bayes), prior.second_moment(), policy.tail_tol);
}

}  // namespace

MixtureTable bayes_estimator(const DiscretePrior& prior, const TruncationPolicy& policy) {
  if (!(policy.tail_tol > 0.0) || policy.tail_tol >= 1.0) throw ValidationError("tail_tol must lie in (0, 1)");
  if (!prior.is_product()) return table_for_atoms(prior, policy);

  const std::size_t d = prior.dim();
  TruncationPolicy per_factor = policy;
  per_factor.tail_tol = policy.tail_tol / static_cast<double>(d);
  std::vector<MixtureTable> factors;
  std::vector<std::int64_t> extents;
  for (const auto& f : prior.factors()) {
    factors.push_back(table_for_atoms(f, per_factor));
    extents.push_back(factors.back().extents()[0]);
  }
  std::size_t points = 1;
  for (auto e : extents) points *= static_cast<std::size_t>(e);
  std::vector<double> pmf(points), bayes(points * d);
  std::vector<std::size_t> coord(d, 0);
  for (std::size_t idx = 0; idx < points; ++idx) {
    double p = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      p *= factors[j].pmf(coord[j]);
      bayes[idx * d + j] = factors[j].bayes(coord[j], 0);
    }
    pmf[idx] = p;
    for (std::size_t j = d; j-- > 0;) {
      if (++coord[j] < static_cast<std::size_t>(extents[j])) break;
      coord[j] = 0;
    }
  }
  return MixtureTable(std::move(extents), std::move(pmf), std::move(bayes), prior.second_moment(), policy.tail_tol);
}

// -- sampling ----------------------------------------------------------------

namespace {

// Draws one theta vector (prior.dim() values) into out.
void draw_theta(const Prior& prior, CounterRng& rng, std::vector<double>& cumulative, double* out) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DiscreteAtoms>) {
          if (cumulative.empty()) {
            cumulative.resize(p.probabilities.size());
            std::partial_sum(p.probabilities.begin(), p.probabilities.end(), cumulative.begin());
          }
          const double u = rng.uniform() * cumulative.back();
          auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
          auto a = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                                      static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
          for (std::size_t j = 0; j < p.dim; ++j) out[j] = p.atoms[a * p.dim + j];
        } else if constexpr (std::is_same_v<T, UniformInterval>) {
          out[0] = p.low + (p.high - p.low) * rng.uniform();
        } else if constexpr (std::is_same_v<T, ExponentialRate>) {
          out[0] = sample_exponential(rng, p.rate);
        } else if constexpr (std::is_same_v<T, TriangleUniform>) {
          double s = rng.uniform();
          double t = rng.uniform();
          if (s + t > 1.0) {
            s = 1.0 - s;
            t = 1.0 - t;
          }
          const auto& [v0, v1, v2] = p.vertices;
          for (std::size_t c = 0; c < 2; ++c) {
            out[c] = std::max(0.0, v0[c] + s * (v1[c] - v0[c]) + t * (v2[c] - v0[c]));
          }
        } else {
          std::vector<double> unused;
          for (std::size_t j = 0; j < p.factors.size(); ++j) draw_theta(p.factors[j], rng, unused, out + j);
        }
      },
      prior.variant());
}

}  // namespace

SampleDraw sample(const Prior& prior, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("sample size must be >= 1");
  const std::size_t d = prior.dim();
  SampleDraw draw;
  draw.dim = d;
  draw.thetas.resize(n * d);
  draw.observations.resize(n * d);
  CounterRng theta_rng(derive_seed(seed, {0}));
  CounterRng obs_rng(derive_seed(seed, {1}));
  std::vector<double> cumulative;
  // Discrete products would rebuild their cumulative table per draw; cache per factor.
  std::vector<std::vector<double>> factor_cumulative;
  const auto* product = std::get_if<ProductPrior>(&prior.variant());
  if (product) factor_cumulative.resize(product->factors.size());
  for (std::size_t i = 0; i < n; ++i) {
    double* theta = draw.thetas.data() + i * d;
    if (product) {
      for (std::size_t j = 0; j < d; ++j) draw_theta(product->factors[j], theta_rng, factor_cumulative[j], theta + j);
    } else {
      draw_theta(prior, theta_rng, cumulative, theta);
    }
    for (std::size_t j = 0; j < d; ++j) draw.observations[i * d + j] = sample_poisson(obs_rng, theta[j]);
  }
  return draw;
}

}  // namespace ebayes
