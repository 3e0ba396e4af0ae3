#pragma once

// Subcommands of the ebayes tool. Each returns a process exit code; messages
// go to the supplied streams so tests can drive the CLI in-process.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ebayes/counts.hpp"
#include "ebayes/estimators.hpp"
#include "ebayes/mixtures.hpp"

namespace ebayes::cli {

/// 1-d files hold whitespace-separated integers; d-dim files hold one
/// comma-separated vector per line. Throws ValidationError.
EmpiricalCounts read_sample(const std::filesystem::path& path);
EmpiricalCounts parse_sample(const std::string& text);

struct FitArgs {
  std::filesystem::path input;
  std::string method = "erm";
  std::filesystem::path out = ".";
  double nb_r = 1.0;
};

struct RegretArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

struct BenchConfig {
  Prior prior{ExponentialRate{1.0}};
  std::size_t dim = 1;
  std::vector<std::size_t> sample_sizes;
  std::vector<Method> methods;
  std::size_t repetitions = 5;
  std::uint64_t seed = 0;
  /// Problem sizes k for the stack vs blockwise solver comparison.
  std::vector<std::size_t> solver_sizes;
};

/// Keys: prior, d, n, methods, repetitions, seed, solver_sizes, output.
BenchConfig parse_bench_config(const std::string& json_text);

struct BenchRow {
  std::string method;
  std::size_t n = 0;
  double median_ms = 0.0;
};

/// Rows sorted by (method, n).
std::vector<BenchRow> run_bench(const BenchConfig& config);
std::string bench_csv(const std::vector<BenchRow>& rows);

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);
int cmd_regret(const RegretArgs& args, std::ostream& out, std::ostream& err);
int cmd_bench(const RegretArgs& args, std::ostream& out, std::ostream& err);

/// Full command line, argv[0] included.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ebayes::cli
