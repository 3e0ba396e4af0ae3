#include "ebayes/random.hpp"

#include <cmath>

#include "ebayes/error.hpp"

namespace ebayes {

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) noexcept {
  std::uint64_t h = mix64(seed ^ 0x5851F42D4C957F2DULL);
  for (auto label : labels) h = mix64(h ^ mix64(label + 0x2545F4914F6CDD1DULL));
  return h;
}

double sample_exponential(CounterRng& rng, double rate) {
  return -std::log(rng.uniform()) / rate;
}

std::int64_t sample_poisson(CounterRng& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw ValidationError("Poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    const double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    while (u > cdf) {
      k += 1;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p < 1e-300 && k > mean) break;  // u within rounding of 1
    }
    return k;
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
    const double rhs = -mean + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0);
    if (lhs <= rhs) return k;
  }
}

}  // namespace ebayes
