#pragma once

#include <string>
#include <string_view>

#include "ebayes/estimators.hpp"

namespace ebayes {

/// JSON document {dim, method, ...}. Step rules carry `knots`, erm_multi
/// carries `classes`, Robbins rules carry their `counts`. Doubles are written
/// in shortest round-trip form, so load(dump(e)) == e bit for bit.
std::string dump_estimator(const FittedEstimator& estimator);

/// Inverse of dump_estimator. Throws ValidationError on malformed documents.
FittedEstimator load_estimator(std::string_view json_text);

/// Human-readable table of the rule's knots (or, for Robbins, its values on
/// 0..max observed).
std::string knot_table(const FittedEstimator& estimator);

}  // namespace ebayes
