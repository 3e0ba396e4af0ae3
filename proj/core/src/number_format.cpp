#include "ebayes/number_format.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace ebayes {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

std::string format_int(std::int64_t x) { return std::to_string(x); }

std::string format_uint(std::uint64_t x) { return std::to_string(x); }

}  // namespace ebayes
