#include "ebayes/estimator_io.hpp"

#include <sstream>

#include <json.hpp>

#include "ebayes/error.hpp"
#include "ebayes/number_format.hpp"

namespace ebayes {

using nlohmann::json;

namespace {

json knots_json(const StepEstimator& step) {
  json arr = json::array();
  for (const auto& k : step.knots()) arr.push_back({{"position", k.position}, {"value", k.value}});
  return arr;
}

StepEstimator step_from_json(const json& doc, isotonic::Direction direction) {
  std::vector<Knot> knots;
  for (const auto& k : doc.at("knots")) {
    knots.push_back({k.at("position").get<std::int64_t>(), k.at("value").get<double>()});
  }
  return StepEstimator(std::move(knots), direction, doc.value("below_min_value", 0.0));
}

}  // namespace

std::string dump_estimator(const FittedEstimator& estimator) {
  json doc;
  doc["dim"] = estimator.dim();
  doc["method"] = to_string(estimator.method());
  std::visit(
      [&](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, StepEstimator>) {
          doc["direction"] = isotonic::to_string(rule.direction());
          doc["below_min_value"] = rule.below_min_value();
          doc["knots"] = knots_json(rule);
        } else if constexpr (std::is_same_v<T, MultiEstimator>) {
          json classes = json::array();
          for (std::size_t j = 0; j < rule.dim(); ++j) {
            for (const auto& [key, step] : rule.classes(j)) {
              classes.push_back({{"coordinate", j},
                                 {"key", key},
                                 {"below_min_value", step.below_min_value()},
                                 {"knots", knots_json(step)}});
            }
          }
          doc["classes"] = std::move(classes);
        } else {
          json counts = json::array();
          for (const auto& e : rule.counts().entries()) {
            counts.push_back({{"point", e.point}, {"count", e.count}});
          }
          doc["counts"] = std::move(counts);
        }
      },
      estimator.rule());
  if (estimator.method() == Method::erm_negbinomial) doc["r"] = estimator.nb_r();
  return doc.dump(2) + "\n";
}

FittedEstimator load_estimator(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    const auto dim = doc.at("dim").get<std::size_t>();
    const Method method = method_from_string(doc.at("method").get<std::string>());
    switch (method) {
      case Method::erm:
      case Method::mono_robbins:
      case Method::erm_geometric:
      case Method::erm_negbinomial: {
        const auto direction = isotonic::direction_from_string(doc.at("direction").get<std::string>());
        const double r = method == Method::erm_negbinomial ? doc.at("r").get<double>() : 0.0;
        return FittedEstimator(method, dim, step_from_json(doc, direction), r);
      }
      case Method::erm_multi: {
        std::vector<MultiEstimator::ClassMap> per_coordinate(dim);
        for (const auto& c : doc.at("classes")) {
          const auto j = c.at("coordinate").get<std::size_t>();
          if (j >= dim) throw ValidationError("class coordinate out of range");
          per_coordinate[j].emplace(c.at("key").get<LatticePoint>(),
                                    step_from_json(c, isotonic::Direction::nondecreasing));
        }
        return FittedEstimator(method, dim, MultiEstimator(dim, std::move(per_coordinate)));
      }
      case Method::robbins:
      case Method::robbins_multi: {
        std::vector<EmpiricalCounts::Entry> entries;
        for (const auto& e : doc.at("counts")) {
          entries.push_back({e.at("point").get<LatticePoint>(), e.at("count").get<std::int64_t>()});
        }
        return FittedEstimator(method, dim, RobbinsEstimator(EmpiricalCounts(dim, std::move(entries))));
      }
    }
    throw ValidationError("unsupported method in estimator document");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed estimator document: ") + e.what());
  }
}

std::string knot_table(const FittedEstimator& estimator) {
  std::ostringstream os;
  os << "# method " << to_string(estimator.method()) << ", d = " << estimator.dim() << "\n";
  std::visit(
      [&](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, StepEstimator>) {
          os << "position\tvalue\n";
          for (const auto& k : rule.knots()) os << k.position << "\t" << format_double(k.value) << "\n";
        } else if constexpr (std::is_same_v<T, MultiEstimator>) {
          os << "coordinate\tclass\tposition\tvalue\n";
          for (std::size_t j = 0; j < rule.dim(); ++j) {
            for (const auto& [key, step] : rule.classes(j)) {
              std::string label = "(";
              for (std::size_t i = 0; i < key.size(); ++i) label += (i ? "," : "") + format_int(key[i]);
              label += ")";
              for (const auto& k : step.knots()) {
                os << j << "\t" << label << "\t" << k.position << "\t" << format_double(k.value) << "\n";
              }
            }
          }
        } else {
          os << "point\tcoordinate\tvalue\n";
          for (const auto& e : rule.counts().entries()) {
            std::string label;
            for (std::size_t i = 0; i < e.point.size(); ++i) label += (i ? "," : "") + format_int(e.point[i]);
            for (std::size_t j = 0; j < rule.dim(); ++j) {
              os << label << "\t" << j << "\t" << format_double(rule.evaluate(e.point, j)) << "\n";
            }
          }
        }
      },
      estimator.rule());
  return os.str();
}

}  // namespace ebayes
