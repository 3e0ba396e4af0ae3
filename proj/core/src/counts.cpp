#include "ebayes/counts.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ebayes/error.hpp"

namespace ebayes {

EmpiricalCounts::EmpiricalCounts(std::size_t dim, std::vector<Entry> entries)
    : dim_(dim), entries_(std::move(entries)) {
  if (dim_ == 0) throw ValidationError("dimension must be positive");
  if (entries_.empty()) throw ValidationError("empty sample");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (e.point.size() != dim_) throw ValidationError("mixed dimensions in counts");
    if (e.count < 1) throw ValidationError("counts must be >= 1");
    for (auto c : e.point) {
      if (c < 0) throw ValidationError("negative coordinate in counts");
    }
    if (i > 0 && !(entries_[i - 1].point < e.point)) {
      throw ValidationError("count entries must be sorted and unique");
    }
    total_ += e.count;
  }
}

std::int64_t EmpiricalCounts::count(std::span<const std::int64_t> x) const {
  if (x.size() != dim_) throw ValidationError("point dimension does not match counts");
  for (auto c : x) {
    if (c < 0) return 0;
  }
  auto it = std::lower_bound(entries_.begin(), entries_.end(), x, [](const Entry& e, std::span<const std::int64_t> p) {
    return std::lexicographical_compare(e.point.begin(), e.point.end(), p.begin(), p.end());
  });
  if (it != entries_.end() && std::equal(it->point.begin(), it->point.end(), x.begin(), x.end())) {
    return it->count;
  }
  return 0;
}

std::int64_t EmpiricalCounts::count(std::int64_t x) const {
  if (dim_ != 1) throw ValidationError("scalar lookup requires d = 1");
  if (x < 0) return 0;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                             [](const Entry& e, std::int64_t v) { return e.point[0] < v; });
  return (it != entries_.end() && it->point[0] == x) ? it->count : 0;
}

std::int64_t EmpiricalCounts::max_coordinate(std::size_t j) const {
  if (j >= dim_) throw ValidationError("coordinate out of range");
  std::int64_t m = 0;
  for (const auto& e : entries_) m = std::max(m, e.point[j]);
  return m;
}

EmpiricalCounts tabulate(std::span<const LatticePoint> sample) {
  if (sample.empty()) throw ValidationError("empty sample");
  const std::size_t dim = sample.front().size();
  if (dim == 0) throw ValidationError("points must have at least one coordinate");
  std::vector<std::int64_t> flat;
  flat.reserve(sample.size() * dim);
  for (const auto& p : sample) {
    if (p.size() != dim) throw ValidationError("mixed dimensions in sample");
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return tabulate(flat, dim);
}

EmpiricalCounts tabulate(std::span<const std::int64_t> flat, std::size_t dim) {
  if (dim == 0) throw ValidationError("dimension must be positive");
  if (flat.empty()) throw ValidationError("empty sample");
  if (flat.size() % dim != 0) throw ValidationError("mixed dimensions in sample");
  for (auto c : flat) {
    if (c < 0) throw ValidationError("negative coordinate in sample");
  }
  const std::size_t n = flat.size() / dim;
  std::vector<EmpiricalCounts::Entry> entries;

  if (dim == 1) {
    std::vector<std::int64_t> sorted(flat.begin(), flat.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && sorted[j] == sorted[i]) ++j;
      entries.push_back({LatticePoint{sorted[i]}, static_cast<std::int64_t>(j - i)});
      i = j;
    }
    return EmpiricalCounts(1, std::move(entries));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto row = [&](std::size_t r) { return flat.subspan(r * dim, dim); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ra = row(a), rb = row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  for (std::size_t i = 0; i < n;) {
    auto ri = row(order[i]);
    std::size_t j = i;
    while (j < n) {
      auto rj = row(order[j]);
      if (!std::equal(ri.begin(), ri.end(), rj.begin())) break;
      ++j;
    }
    entries.push_back({LatticePoint(ri.begin(), ri.end()), static_cast<std::int64_t>(j - i)});
    i = j;
  }
  return EmpiricalCounts(dim, std::move(entries));
}

}  // namespace ebayes
