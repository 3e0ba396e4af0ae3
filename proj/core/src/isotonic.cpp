#include "ebayes/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <type_traits>

#include "ebayes/error.hpp"

namespace ebayes::isotonic {

const char* to_string(Direction d) noexcept {
  return d == Direction::nondecreasing ? "nondecreasing" : "nonincreasing";
}

Direction direction_from_string(std::string_view name) {
  if (name == "nondecreasing") return Direction::nondecreasing;
  if (name == "nonincreasing") return Direction::nonincreasing;
  throw ValidationError("unknown direction '" + std::string(name) + "'");
}

namespace {

__extension__ typedef __int128 Int128;

template <class Weight>
using Wide = std::conditional_t<std::is_integral_v<Weight>, Int128, double>;

// t_a / w_a <= t_b / w_b by cross multiplication; a zero denominator is the
// +inf (or -inf) ratio, so pooling never divides.
template <class Weight>
bool ratio_le(Weight t_a, Weight w_a, Weight t_b, Weight w_b) {
  return Wide<Weight>(t_a) * Wide<Weight>(w_b) <= Wide<Weight>(t_b) * Wide<Weight>(w_a);
}

template <class Weight>
double block_value(Weight lin_sum, Weight quad_sum) {
  return static_cast<double>(lin_sum) / static_cast<double>(quad_sum);
}

template <class Weight>
Block<Weight> make_block(std::size_t first, std::size_t last, Weight quad_sum, Weight lin_sum) {
  if (!(quad_sum > Weight{0})) {
    throw ValidationError("solution contains a block with zero quadratic weight; problem is unbounded");
  }
  return Block<Weight>{first, last, quad_sum, lin_sum, block_value(lin_sum, quad_sum)};
}

template <class Weight>
bool is_finite(Weight x) {
  if constexpr (std::is_floating_point_v<Weight>) {
    return std::isfinite(x);
  } else {
    return true;
  }
}

template <class Weight>
BlockSolution<Weight> map_back_from_reversed(BlockSolution<Weight> sol, std::size_t k) {
  std::reverse(sol.blocks.begin(), sol.blocks.end());
  for (auto& b : sol.blocks) {
    const std::size_t first = k - 1 - b.last;
    const std::size_t last = k - 1 - b.first;
    b.first = first;
    b.last = last;
  }
  sol.direction = Direction::nonincreasing;
  return sol;
}

template <class Weight>
BlockSolution<Weight> blockwise_nondecreasing(const Problem<Weight>& p) {
  const std::size_t k = p.size();
  BlockSolution<Weight> sol;
  std::size_t start = 0;
  while (start < k) {
    Weight t{}, w{};
    Weight best_t{}, best_w{};
    std::size_t best_end = start;
    for (std::size_t i = start; i < k; ++i) {
      t += p.lin_coeffs[i];
      w += p.quad_weights[i];
      // Ties resolve to the largest index.
      if (i == start || ratio_le(t, w, best_t, best_w)) {
        best_t = t;
        best_w = w;
        best_end = i;
      }
    }
    sol.blocks.push_back(make_block(start, best_end, best_w, best_t));
    start = best_end + 1;
  }
  return sol;
}

template <class Weight>
BlockSolution<Weight> stack_nondecreasing(const Problem<Weight>& p) {
  const std::size_t k = p.size();
  struct Entry {
    std::size_t first, last;
    Weight w, t;
  };
  std::vector<Entry> stack;
  stack.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    Entry active{i, i, p.quad_weights[i], p.lin_coeffs[i]};
    while (!stack.empty() && ratio_le(active.t, active.w, stack.back().t, stack.back().w)) {
      const Entry& top = stack.back();
      active.first = top.first;
      active.w += top.w;
      active.t += top.t;
      stack.pop_back();
    }
    stack.push_back(active);
  }
  BlockSolution<Weight> sol;
  sol.blocks.reserve(stack.size());
  for (const Entry& e : stack) sol.blocks.push_back(make_block(e.first, e.last, e.w, e.t));
  return sol;
}

template <class Weight>
BlockSolution<Weight> oracle_nondecreasing(const Problem<Weight>& p) {
  const std::size_t k = p.size();
  const std::uint32_t cuts = static_cast<std::uint32_t>(k - 1);
  bool found = false;
  double best_obj = 0.0;
  BlockSolution<Weight> best;
  std::vector<Block<Weight>> blocks;
  for (std::uint32_t mask = 0; mask < (1u << cuts); ++mask) {
    blocks.clear();
    bool feasible = true;
    std::size_t start = 0;
    for (std::size_t i = 0; i < k && feasible; ++i) {
      const bool cut_after = (i + 1 == k) || ((mask >> i) & 1u);
      if (!cut_after) continue;
      Weight t{}, w{};
      for (std::size_t j = start; j <= i; ++j) {
        t += p.lin_coeffs[j];
        w += p.quad_weights[j];
      }
      if (!(w > Weight{0})) {
        feasible = false;
        break;
      }
      if (!blocks.empty() && !ratio_le(blocks.back().lin_sum, blocks.back().quad_sum, t, w)) {
        feasible = false;
        break;
      }
      blocks.push_back(Block<Weight>{start, i, w, t, block_value(t, w)});
      start = i + 1;
    }
    if (!feasible) continue;
    double obj = 0.0;
    for (const auto& b : blocks) {
      obj += static_cast<double>(b.quad_sum) * b.value * b.value -
             2.0 * static_cast<double>(b.lin_sum) * b.value;
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(best_obj));
    const bool better = !found || obj < best_obj - tol;
    const bool tie_coarser = found && std::abs(obj - best_obj) <= tol && blocks.size() < best.blocks.size();
    if (better || tie_coarser) {
      found = true;
      best_obj = obj;
      best.blocks = blocks;
    }
  }
  if (!found) throw ValidationError("no feasible partition; problem is unbounded");
  return best;
}

template <class Weight, class Solver>
BlockSolution<Weight> dispatch(const Problem<Weight>& problem, Solver solver) {
  problem.validate();
  if (problem.direction == Direction::nondecreasing) {
    auto sol = solver(problem);
    sol.direction = Direction::nondecreasing;
    return sol;
  }
  Problem<Weight> flipped = reversed(problem);
  return map_back_from_reversed(solver(flipped), problem.size());
}

}  // namespace

template <class Weight>
void Problem<Weight>::validate() const {
  const std::size_t k = positions.size();
  if (k == 0) throw ValidationError("problem must have at least one position");
  if (quad_weights.size() != k || lin_coeffs.size() != k) {
    std::ostringstream os;
    os << "length mismatch: positions=" << k << " quad_weights=" << quad_weights.size()
       << " lin_coeffs=" << lin_coeffs.size();
    throw ValidationError(os.str());
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (positions[i] < 0) throw ValidationError("positions must be non-negative");
    if (i > 0 && positions[i] <= positions[i - 1]) {
      throw ValidationError("positions must be strictly increasing");
    }
    if (!is_finite(quad_weights[i]) || !is_finite(lin_coeffs[i])) {
      throw ValidationError("weights must be finite");
    }
    if (quad_weights[i] < Weight{0}) throw ValidationError("quad_weights must be non-negative");
    const Weight abs_w = lin_coeffs[i] < Weight{0} ? -lin_coeffs[i] : lin_coeffs[i];
    if (!(std::max(quad_weights[i], abs_w) > Weight{0})) {
      throw ValidationError("max{v_i, |w_i|} must be positive at every position");
    }
  }

  // Walk in the direction of monotonicity.
  auto at = [&](std::size_t j) {
    return direction == Direction::nondecreasing ? j : k - 1 - j;
  };
  std::size_t first_pos = k, last_pos = k;
  for (std::size_t j = 0; j < k; ++j) {
    if (quad_weights[at(j)] > Weight{0}) {
      if (first_pos == k) first_pos = j;
      last_pos = j;
    }
  }
  if (first_pos == k) throw ValidationError("at least one quad_weight must be positive");
  Weight prefix{};
  for (std::size_t j = 0; j < first_pos; ++j) {
    prefix += lin_coeffs[at(j)];
    if (prefix < Weight{0}) {
      throw ValidationError(
          "leading anchor: zero-weight positions before the first positive v must have "
          "non-negative prefix sums of w");
    }
  }
  Weight suffix{};
  for (std::size_t j = k; j-- > last_pos + 1;) {
    suffix += lin_coeffs[at(j)];
    if (suffix > Weight{0}) {
      throw ValidationError(std::string("terminal anchor: last position in the ") + to_string(direction) +
                            " direction must have positive quad_weight (trailing zero-weight "
                            "positions may not carry positive linear mass)");
    }
  }
}

template <class Weight>
std::vector<double> BlockSolution<Weight>::values() const {
  std::vector<double> out(size());
  for (const auto& b : blocks) {
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(b.first),
              out.begin() + static_cast<std::ptrdiff_t>(b.last) + 1, b.value);
  }
  return out;
}

template <class Weight>
Problem<Weight> reversed(const Problem<Weight>& problem) {
  Problem<Weight> r = problem;
  std::reverse(r.positions.begin(), r.positions.end());
  std::reverse(r.quad_weights.begin(), r.quad_weights.end());
  std::reverse(r.lin_coeffs.begin(), r.lin_coeffs.end());
  r.direction = problem.direction == Direction::nondecreasing ? Direction::nonincreasing
                                                              : Direction::nondecreasing;
  // Positions must stay increasing for validation; mirror them around the max.
  if (!r.positions.empty()) {
    const std::int64_t top = r.positions.front();
    for (auto& a : r.positions) a = top - a;
  }
  return r;
}

template <class Weight>
BlockSolution<Weight> solve_blockwise(const Problem<Weight>& problem) {
  return dispatch(problem, blockwise_nondecreasing<Weight>);
}

template <class Weight>
BlockSolution<Weight> solve_stack(const Problem<Weight>& problem) {
  return dispatch(problem, stack_nondecreasing<Weight>);
}

template <class Weight>
BlockSolution<Weight> solve_oracle(const Problem<Weight>& problem) {
  if (problem.size() > kOracleMaxSize) {
    throw SizeError("solve_oracle supports at most " + std::to_string(kOracleMaxSize) +
                    " positions, got " + std::to_string(problem.size()));
  }
  return dispatch(problem, oracle_nondecreasing<Weight>);
}

template <class Weight>
double objective_value(const Problem<Weight>& problem, std::span<const double> values) {
  if (values.size() != problem.size() || problem.quad_weights.size() != problem.size() ||
      problem.lin_coeffs.size() != problem.size()) {
    throw ValidationError("objective_value: values length " + std::to_string(values.size()) +
                          " does not match problem size " + std::to_string(problem.size()));
  }
  double obj = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = values[i];
    obj += static_cast<double>(problem.quad_weights[i]) * f * f -
           2.0 * static_cast<double>(problem.lin_coeffs[i]) * f;
  }
  return obj;
}

#define EBAYES_INSTANTIATE(W)                                                          \
  template struct Problem<W>;                                                          \
  template struct BlockSolution<W>;                                                    \
  template Problem<W> reversed(const Problem<W>&);                                     \
  template BlockSolution<W> solve_blockwise(const Problem<W>&);                        \
  template BlockSolution<W> solve_stack(const Problem<W>&);                            \
  template BlockSolution<W> solve_oracle(const Problem<W>&);                           \
  template double objective_value(const Problem<W>&, std::span<const double>);

EBAYES_INSTANTIATE(std::int64_t)
EBAYES_INSTANTIATE(double)

#undef EBAYES_INSTANTIATE

}  // namespace ebayes::isotonic
