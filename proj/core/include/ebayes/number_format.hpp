#pragma once

#include <cstdint>
#include <string>

namespace ebayes {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);
std::string format_int(std::int64_t x);
std::string format_uint(std::uint64_t x);

}  // namespace ebayes
