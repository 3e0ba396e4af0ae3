#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ebayes {

/// A point of the non-negative integer lattice Z_+^d.
using LatticePoint = std::vector<std::int64_t>;

/// Sparse tally N(x) of a sample over Z_+^d, stored as entries sorted
/// lexicographically by point. Immutable after construction.
class EmpiricalCounts {
public:
  struct Entry {
    LatticePoint point;
    std::int64_t count = 0;
    bool operator==(const Entry&) const = default;
  };

  /// Entries must be sorted, unique, of dimension `dim`, with counts >= 1.
  EmpiricalCounts(std::size_t dim, std::vector<Entry> entries);

  std::size_t dim() const noexcept { return dim_; }
  std::int64_t total() const noexcept { return total_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t distinct() const noexcept { return entries_.size(); }

  /// N(x); 0 for unseen points or points with a negative coordinate.
  std::int64_t count(std::span<const std::int64_t> x) const;
  std::int64_t count(std::int64_t x) const;  // d = 1 only

  /// Largest value of coordinate j over the sample.
  std::int64_t max_coordinate(std::size_t j) const;

  bool operator==(const EmpiricalCounts&) const = default;

private:
  std::size_t dim_ = 1;
  std::vector<Entry> entries_;
  std::int64_t total_ = 0;
};

/// Tally a list of points. Throws ValidationError on an empty sample, mixed
/// dimensions, or a negative coordinate.
EmpiricalCounts tabulate(std::span<const LatticePoint> sample);

/// Tally a row-major n x dim block of coordinates.
EmpiricalCounts tabulate(std::span<const std::int64_t> flat, std::size_t dim);

}  // namespace ebayes
