#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ebayes/error.hpp"
#include "ebayes/estimator_io.hpp"
#include "ebayes/isotonic.hpp"
#include "ebayes/number_format.hpp"
#include "ebayes/prior_spec.hpp"
#include "ebayes/random.hpp"
#include "ebayes/regret.hpp"

namespace ebayes::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw ValidationError("cannot write file '" + path.string() + "'");
}

std::int64_t parse_int(std::string_view token, std::size_t line) {
  std::int64_t v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("invalid integer '" + std::string(token) + "' on line " + std::to_string(line));
  }
  if (v < 0) throw ValidationError("negative entry " + std::string(token) + " on line " + std::to_string(line));
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Count the data rows of a CSV with a header line.
std::size_t csv_rows(const std::string& text, std::size_t expected_columns) {
  std::istringstream in(text);
  std::string line;
  std::size_t rows = 0;
  bool header = true;
  while (std::getline(in, line)) {
    const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (cols != expected_columns) throw ValidationError("malformed CSV line: " + line);
    if (header) {
      header = false;
      continue;
    }
    ++rows;
  }
  return rows;
}

fs::path prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Noisy increasing trend; the number of pooled blocks grows with k, so
// the blockwise solver does real work.
isotonic::IntegerProblem solver_instance(std::size_t k, std::uint64_t seed) {
  CounterRng rng(derive_seed(seed, {k}));
  isotonic::IntegerProblem p;
  p.positions.resize(k);
  p.quad_weights.resize(k);
  p.lin_coeffs.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    p.positions[i] = static_cast<std::int64_t>(i);
    p.quad_weights[i] = 1 + static_cast<std::int64_t>(rng.next_u64() % 20);
    const auto trend = static_cast<std::int64_t>(100.0 * static_cast<double>(i) / static_cast<double>(k));
    p.lin_coeffs[i] = p.quad_weights[i] * (trend + static_cast<std::int64_t>(rng.next_u64() % 50));
  }
  return p;
}

}  // namespace

EmpiricalCounts parse_sample(const std::string& text) {
  if (text.find(',') == std::string::npos) {
    std::vector<std::int64_t> values;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream words(line);
      std::string token;
      while (words >> token) values.push_back(parse_int(token, line_no));
    }
    return tabulate(values, 1);
  }
  std::vector<LatticePoint> points;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    LatticePoint p;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      const std::string token = trim(std::string_view(line).substr(start, comma - start));
      p.push_back(parse_int(token, line_no));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    points.push_back(std::move(p));
  }
  return tabulate(points);
}

EmpiricalCounts read_sample(const fs::path& path) { return parse_sample(read_file(path)); }

BenchConfig parse_bench_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  static const std::vector<std::string> allowed = {"prior", "d", "n", "methods", "repetitions",
                                                   "seed", "solver_sizes", "output"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) throw ConfigError(key, "unknown key");
  }
  auto sizes = [&](const char* key) {
    std::vector<std::size_t> out;
    if (!doc.contains(key)) return out;
    const json& node = doc[key];
    if (!node.is_array()) throw ConfigError(key, "expected an array of positive integers");
    for (const auto& v : node) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw ConfigError(key, "expected an array of positive integers");
      }
      out.push_back(v.get<std::size_t>());
    }
    return out;
  };

  BenchConfig c;
  if (doc.contains("prior")) c.prior = parse_prior_spec(doc["prior"].dump());
  c.dim = c.prior.dim();
  if (doc.contains("d")) {
    if (!doc["d"].is_number_integer() || doc["d"].get<std::int64_t>() < 1) {
      throw ConfigError("d", "expected a positive integer");
    }
    c.dim = doc["d"].get<std::size_t>();
  }
  if (c.dim != c.prior.dim()) throw ConfigError("d", "does not match the prior dimension");
  c.sample_sizes = sizes("n");
  c.solver_sizes = sizes("solver_sizes");
  if (doc.contains("methods")) {
    if (!doc["methods"].is_array()) throw ConfigError("methods", "expected an array of method names");
    for (const auto& m : doc["methods"]) {
      if (!m.is_string()) throw ConfigError("methods", "expected an array of method names");
      try {
        c.methods.push_back(method_from_string(m.get<std::string>()));
      } catch (const ValidationError& e) {
        throw ConfigError("methods", e.what());
      }
      if (!supports_dimension(c.methods.back(), c.dim)) {
        throw ConfigError("methods", std::string("method ") + to_string(c.methods.back()) +
                                         " does not support d = " + std::to_string(c.dim));
      }
    }
  }
  if (doc.contains("repetitions")) {
    const json& r = doc["repetitions"];
    if (!r.is_number_integer() || r.get<std::int64_t>() < 1) throw ConfigError("repetitions", "expected a positive integer");
    c.repetitions = r.get<std::size_t>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (c.methods.empty() != c.sample_sizes.empty()) {
    throw ConfigError(c.methods.empty() ? "methods" : "n", "methods and n must be given together");
  }
  if (c.methods.empty() && c.solver_sizes.empty()) {
    throw ConfigError("methods", "nothing to benchmark: give methods and n, or solver_sizes");
  }
  return c;
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (std::size_t n : config.sample_sizes) {
    const SampleDraw draw = sample(config.prior, n, derive_seed(config.seed, {n}));
    for (Method m : config.methods) {
      std::vector<double> times;
      for (std::size_t r = 0; r < config.repetitions; ++r) {
        const auto start = clock::now();
        const EmpiricalCounts counts = tabulate(draw.observations, config.dim);
        const FittedEstimator est = fit(m, counts);
        times.push_back(std::chrono::duration<double, std::milli>(clock::now() - start).count());
        if (est.dim() != config.dim) throw ValidationError("fit returned the wrong dimension");
      }
      rows.push_back({to_string(m), n, median(times)});
    }
  }
  for (std::size_t k : config.solver_sizes) {
    const isotonic::IntegerProblem problem = solver_instance(k, config.seed);
    std::vector<double> stack_times, block_times;
    for (std::size_t r = 0; r < config.repetitions; ++r) {
      auto start = clock::now();
      const auto a = isotonic::solve_stack(problem);
      stack_times.push_back(std::chrono::duration<double, std::milli>(clock::now() - start).count());
      start = clock::now();
      const auto b = isotonic::solve_blockwise(problem);
      block_times.push_back(std::chrono::duration<double, std::milli>(clock::now() - start).count());
      if (!(a == b)) throw ValidationError("stack and blockwise solvers disagree at k = " + std::to_string(k));
    }
    rows.push_back({"isotonic_stack", k, median(stack_times)});
    rows.push_back({"isotonic_blockwise", k, median(block_times)});
  }
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return a.method != b.method ? a.method < b.method : a.n < b.n;
  });
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "method,n,median_ms\n";
  for (const auto& r : rows) os << r.method << ',' << r.n << ',' << format_double(r.median_ms) << '\n';
  return os.str();
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Method method = method_from_string(args.method);
    const EmpiricalCounts counts = read_sample(args.input);
    if (!supports_dimension(method, counts.dim())) {
      throw ValidationError(std::string("method ") + to_string(method) + " does not support d = " +
                            std::to_string(counts.dim()));
    }
    const FittedEstimator est = fit(method, counts, FitOptions{args.nb_r});
    const fs::path dir = prepare_out_dir(args.out);
    const std::string dump = dump_estimator(est);
    write_file(dir / "estimator.json", dump);
    const std::string table = knot_table(est);
    write_file(dir / "knots.txt", table);
    // Read back what was written before reporting success.
    if (!(load_estimator(read_file(dir / "estimator.json")) == est)) {
      throw ValidationError("estimator.json did not round-trip");
    }
    out << "fitted " << to_string(method) << " on n=" << counts.total() << " (d=" << counts.dim()
        << ", distinct=" << counts.distinct() << ")\n"
        << table << "wrote " << (dir / "estimator.json").string() << " and " << (dir / "knots.txt").string()
        << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_regret(const RegretArgs& args, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig config = parse_experiment_config(read_file(args.config));
    if (args.seed) config.seed = *args.seed;
    if (args.threads) config.threads = *args.threads;
    if (args.out) config.output = args.out->string();
    if (config.output.empty()) config.output = ".";
    config.validate();
    const fs::path dir = prepare_out_dir(config.output);

    const RegretReport report = run_experiment(config);
    const std::string csv = regret_csv(report, config.timing_in_csv);
    write_file(dir / "regret.csv", csv);
    write_file(dir / "fit_times.csv", fit_times_csv(report));
    write_file(dir / "regret_summary.json", regret_summary_json(report));
    write_file(dir / "config.resolved.json", experiment_config_json(config));

    const std::size_t expected = config.methods.size() * config.sample_sizes.size() * config.replications;
    if (csv_rows(read_file(dir / "regret.csv"), 7) != expected ||
        csv_rows(read_file(dir / "fit_times.csv"), 5) != expected) {
      throw ValidationError("written CSV does not have the expected " + std::to_string(expected) + " rows");
    }
    const json summary = json::parse(read_file(dir / "regret_summary.json"));
    if (summary.at("aggregates").size() != config.methods.size() * config.sample_sizes.size()) {
      throw ValidationError("regret_summary.json has the wrong number of aggregates");
    }

    out << "prior " << report.prior << ", mmse " << format_double(report.mmse) << ", captured mass "
        << format_double(report.captured_mass) << "\n";
    for (const auto& a : report.aggregates) {
      out << to_string(a.method) << " n=" << a.n << " mean regret " << format_double(a.mean) << " (se "
          << format_double(a.std_error) << ")\n";
    }
    out << "wrote " << expected << " rows to " << (dir / "regret.csv").string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_bench(const RegretArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const std::string text = read_file(args.config);
    BenchConfig config = parse_bench_config(text);
    if (args.seed) config.seed = *args.seed;
    fs::path dir = ".";
    const json doc = json::parse(text);
    if (doc.contains("output")) dir = doc["output"].get<std::string>();
    if (args.out) dir = *args.out;
    prepare_out_dir(dir);

    const std::vector<BenchRow> rows = run_bench(config);
    const std::string csv = bench_csv(rows);
    write_file(dir / "bench.csv", csv);
    const std::size_t expected =
        config.methods.size() * config.sample_sizes.size() + 2 * config.solver_sizes.size();
    if (csv_rows(read_file(dir / "bench.csv"), 3) != expected) {
      throw ValidationError("bench.csv does not have the expected " + std::to_string(expected) + " rows");
    }
    out << csv;
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Empirical Bayes estimation of Poisson means by monotone empirical risk minimization"};
  app.require_subcommand(1, 1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit an estimator to a sample file");
  fit_cmd->add_option("--input", fit_args.input, "Sample file")->required();
  fit_cmd->add_option("--method", fit_args.method, "robbins | erm | mono_robbins | robbins_multi | erm_multi | "
                                                   "erm_geometric | erm_negbinomial");
  fit_cmd->add_option("--out", fit_args.out, "Output directory");
  fit_cmd->add_option("--r", fit_args.nb_r, "Shape r for erm_negbinomial");

  RegretArgs regret_args;
  auto* regret_cmd = app.add_subcommand("regret", "Run a regret experiment");
  auto add_common = [](CLI::App* cmd, RegretArgs& a) {
    cmd->add_option("--config", a.config, "Experiment config (JSON)")->required();
    cmd->add_option("--out", a.out, "Output directory");
    cmd->add_option("--seed", a.seed, "Master seed");
    cmd->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
  };
  add_common(regret_cmd, regret_args);

  RegretArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Time estimator fits");
  add_common(bench_cmd, bench_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  if (fit_cmd->parsed()) return cmd_fit(fit_args, out, err);
  if (regret_cmd->parsed()) return cmd_regret(regret_args, out, err);
  return cmd_bench(bench_args, out, err);
}

}  // namespace ebayes::cli
