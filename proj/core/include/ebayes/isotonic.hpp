#pragma once

// Weighted monotone quadratic minimization.
//
// Given positions a_1 < ... < a_k, quadratic weights v_i >= 0 and linear
// coefficients w_i, find the monotone f minimizing
//
//     sum_i v_i f(a_i)^2 - 2 w_i f(a_i).
//
// The minimizer is constant on a partition of 1..k into contiguous blocks and
// takes the value (sum w)/(sum v) on each block. Three solvers are provided:
// a greedy blockwise construction (quadratic), a single-pass stack (linear),
// and exhaustive partition enumeration for small k (test oracle). All three
// return the coarsest optimal partition, so their outputs can be compared
// block-for-block.
//
// Weight is either std::int64_t (exact path: every ratio comparison is a
// 128-bit cross multiplication) or double.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ebayes::isotonic {

enum class Direction { nondecreasing, nonincreasing };

const char* to_string(Direction d) noexcept;
Direction direction_from_string(std::string_view name);

template <class Weight>
struct Problem {
  std::vector<std::int64_t> positions;
  std::vector<Weight> quad_weights;
  std::vector<Weight> lin_coeffs;
  Direction direction = Direction::nondecreasing;

  std::size_t size() const noexcept { return positions.size(); }

  /// Throws ValidationError naming the first violated invariant.
  ///
  /// Besides the shape checks, the problem must be bounded below: a run of
  /// zero-weight entries at the open end of the chain may not pull the
  /// solution towards infinity. For the nondecreasing direction this means
  /// the suffix sums of w after the last positive v are <= 0 (the usual
  /// requirement v_k > 0 is the special case of an empty run) and the prefix
  /// sums of w before the first positive v are >= 0.
  void validate() const;
};

using IntegerProblem = Problem<std::int64_t>;
using RealProblem = Problem<double>;

/// One constant piece of the solution: indices [first, last] (inclusive,
/// into the problem's lists), the pooled sums, and the pooled value.
template <class Weight>
struct Block {
  std::size_t first = 0;
  std::size_t last = 0;
  Weight quad_sum{};
  Weight lin_sum{};
  double value = 0.0;

  std::size_t length() const noexcept { return last - first + 1; }
  bool operator==(const Block&) const = default;
};

template <class Weight>
struct BlockSolution {
  std::vector<Block<Weight>> blocks;  // ordered by index
  Direction direction = Direction::nondecreasing;

  /// Per-position values, length k.
  std::vector<double> values() const;
  std::size_t size() const noexcept { return blocks.empty() ? 0 : blocks.back().last + 1; }
  bool operator==(const BlockSolution&) const = default;
};

/// Greedy construction: each block ends at the largest index minimizing the
/// cumulative ratio (sum w)/(sum v) from the block start, +inf when sum v = 0.
template <class Weight>
BlockSolution<Weight> solve_blockwise(const Problem<Weight>& problem);

/// Single left-to-right pass maintaining a stack of pooled blocks whose
/// ratios strictly increase; the incoming block absorbs the top while
/// t * w_top <= t_top * w. O(k).
template <class Weight>
BlockSolution<Weight> solve_stack(const Problem<Weight>& problem);

inline constexpr std::size_t kOracleMaxSize = 12;

/// Enumerates all 2^(k-1) contiguous partitions. k <= kOracleMaxSize.
template <class Weight>
BlockSolution<Weight> solve_oracle(const Problem<Weight>& problem);

/// sum_i v_i f_i^2 - 2 w_i f_i. Positions are ignored.
template <class Weight>
double objective_value(const Problem<Weight>& problem, std::span<const double> values);

/// The same problem with every list reversed and the direction flipped.
template <class Weight>
Problem<Weight> reversed(const Problem<Weight>& problem);

}  // namespace ebayes::isotonic
