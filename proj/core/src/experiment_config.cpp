#include <json.hpp>

#include "ebayes/error.hpp"
#include "ebayes/regret.hpp"
#include "prior_json.hpp"

namespace ebayes {

using nlohmann::json;

namespace {

std::size_t positive_size(const json& node, const std::string& key) {
  if (!node.is_number_integer() || node.get<std::int64_t>() < 1) {
    throw ConfigError(key, "expected a positive integer");
  }
  return node.get<std::size_t>();
}

bool boolean(const json& node, const std::string& key) {
  if (!node.is_boolean()) throw ConfigError(key, "expected true or false");
  return node.get<bool>();
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  detail::reject_unknown_keys(doc,
                              {"prior", "d", "n", "methods", "R", "seed", "tail_tol", "output", "paired", "threads",
                               "timing_in_csv", "quadrature"},
                              "");

  ExperimentConfig c;
  if (!doc.contains("prior")) throw ConfigError("prior", "missing required key");
  c.prior = detail::prior_from_json(doc["prior"], "prior");
  c.dim = doc.contains("d") ? positive_size(doc["d"], "d") : c.prior.dim();

  if (!doc.contains("n")) throw ConfigError("n", "missing required key");
  const json& n = doc["n"];
  if (n.is_array()) {
    if (n.empty()) throw ConfigError("n", "at least one sample size required");
    for (const auto& v : n) c.sample_sizes.push_back(positive_size(v, "n"));
  } else {
    c.sample_sizes.push_back(positive_size(n, "n"));
  }

  if (!doc.contains("methods")) throw ConfigError("methods", "missing required key");
  const json& methods = doc["methods"];
  if (!methods.is_array()) throw ConfigError("methods", "expected an array of method names");
  for (const auto& m : methods) {
    if (!m.is_string()) throw ConfigError("methods", "expected an array of method names");
    try {
      c.methods.push_back(method_from_string(m.get<std::string>()));
    } catch (const ValidationError& e) {
      throw ConfigError("methods", e.what());
    }
  }

  if (doc.contains("R")) c.replications = positive_size(doc["R"], "R");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("tail_tol")) {
    if (!doc["tail_tol"].is_number()) throw ConfigError("tail_tol", "expected a number");
    c.tail_tol = doc["tail_tol"].get<double>();
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ConfigError("output", "expected a path string");
    c.output = doc["output"].get<std::string>();
  }
  if (doc.contains("paired")) c.paired = boolean(doc["paired"], "paired");
  if (doc.contains("threads")) c.threads = positive_size(doc["threads"], "threads");
  if (doc.contains("timing_in_csv")) c.timing_in_csv = boolean(doc["timing_in_csv"], "timing_in_csv");
  if (doc.contains("quadrature")) {
    const json& q = doc["quadrature"];
    if (!q.is_object()) throw ConfigError("quadrature", "expected an object");
    detail::reject_unknown_keys(q, {"tol", "panels", "triangle_subdivisions"}, "quadrature");
    if (q.contains("tol")) {
      if (!q["tol"].is_number()) throw ConfigError("quadrature.tol", "expected a number");
      c.quadrature.tol = q["tol"].get<double>();
      if (!(c.quadrature.tol > 0.0) || c.quadrature.tol > 1e-3) {
        throw ConfigError("quadrature.tol", "must lie in (0, 1e-3]");
      }
    }
    if (q.contains("panels")) c.quadrature.panels = positive_size(q["panels"], "quadrature.panels");
    if (q.contains("triangle_subdivisions")) {
      c.quadrature.triangle_subdivisions =
          positive_size(q["triangle_subdivisions"], "quadrature.triangle_subdivisions");
    }
  }
  c.validate();
  return c;
}

std::string experiment_config_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(to_string(m));
  json doc = {{"prior", detail::prior_to_json(c.prior)},
              {"d", c.dim},
              {"n", c.sample_sizes},
              {"methods", methods},
              {"R", c.replications},
              {"seed", c.seed},
              {"tail_tol", c.tail_tol},
              {"output", c.output},
              {"paired", c.paired},
              {"threads", c.threads},
              {"timing_in_csv", c.timing_in_csv},
              {"quadrature",
               {{"tol", c.quadrature.tol},
                {"panels", c.quadrature.panels},
                {"triangle_subdivisions", c.quadrature.triangle_subdivisions}}}};
  return doc.dump(2) + "\n";
}

}  // namespace ebayes
