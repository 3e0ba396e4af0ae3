#pragma once

#include <stdexcept>
#include <string>

namespace ebayes {

/// Input violates a documented invariant. The message names the invariant.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A size or capacity limit was exceeded (oracle size, node cap, lattice cap).
class SizeError : public std::length_error {
public:
  using std::length_error::length_error;
};

/// Malformed configuration document. `key()` names the offending key.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

}  // namespace ebayes

namespace ebayes {

/// A replication of an experiment failed; the message identifies the
/// (method, n, replication) cell.
class ExperimentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ebayes
