#pragma once

#include <stdexcept>
#include <string>

namespace ganbench {

// Error taxonomy mirrored by the CLI exit codes.
struct InfeasibleSceneError : std::runtime_error {
  explicit InfeasibleSceneError(const std::string& m) : std::runtime_error(m) {}
};

struct IncompatibleCheckpointError : std::runtime_error {
  explicit IncompatibleCheckpointError(const std::string& m) : std::runtime_error(m) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& m) : std::runtime_error(m) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace ganbench
