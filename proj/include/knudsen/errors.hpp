#pragma once

#include <stdexcept>
#include <string>

namespace knudsen {

struct DegenerateTangent : std::runtime_error {
  explicit DegenerateTangent(const std::string& what) : std::runtime_error(what) {}
};

struct TangentRay : std::runtime_error {
  explicit TangentRay(const std::string& what) : std::runtime_error(what) {}
};

struct NoRootFound : std::runtime_error {
  explicit NoRootFound(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientTrajectory : std::runtime_error {
  explicit InsufficientTrajectory(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfRange : std::runtime_error {
  explicit OutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientSamples : std::runtime_error {
  explicit InsufficientSamples(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownLemma : std::runtime_error {
  explicit UnknownLemma(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace knudsen
