#pragma once

// nlohmann-based helpers shared by the config parsers. Not installed.

#include <set>
#include <string>

#include <json.hpp>

#include "ebayes/error.hpp"
#include "ebayes/mixtures.hpp"

namespace ebayes::detail {

Prior prior_from_json(const nlohmann::json& doc, const std::string& path);
nlohmann::json prior_to_json(const Prior& prior);

/// Rejects keys of `doc` outside `allowed`, naming the first offender.
void reject_unknown_keys(const nlohmann::json& doc, const std::set<std::string>& allowed, const std::string& path);

std::string join_key(const std::string& path, const std::string& key);

}  // namespace ebayes::detail
