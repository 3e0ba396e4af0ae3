#pragma once

#include <cstdint>
#include <initializer_list>

namespace ebayes {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Hash a seed and a list of stream labels into an independent stream key.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) noexcept;

/// Counter-based generator: draw i of stream `key` is mix64(key + i * gamma).
/// Streams are addressed by key alone, so any (seed, labels...) tuple names a
/// reproducible, independent sequence with no shared state.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept {
    counter_ += 1;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Exp(rate) draw by inversion.
double sample_exponential(CounterRng& rng, double rate);

/// Poisson(mean) draw: sequential-search inversion for mean < 30, otherwise
/// transformed rejection with squeeze (Hormann's PTRS), which is exact.
std::int64_t sample_poisson(CounterRng& rng, double mean);

}  // namespace ebayes
