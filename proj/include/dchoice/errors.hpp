#pragma once

#include <stdexcept>
#include <string>

namespace dchoice {

// Invalid arguments are reported with std::invalid_argument. The types below
// cover the remaining failure classes.

/// The requested design, allocation kind or operation is not implemented for
/// the given parameters.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver failed to converge or produced a solution that fails its own
/// residual checks.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration. `path()` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Unparseable input file (allocation or config).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dchoice
