#pragma once

#include <stdexcept>
#include <string>

namespace entrocf {

// Base for all library errors. `kind()` is a stable tag used by the CLI when
// it reports failures as JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape_error", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config_error", what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error("parameter_error", what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& location, const std::string& what)
      : Error("parse_error", location + ": " + what), location_(location) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

class VersionError : public Error {
 public:
  explicit VersionError(const std::string& what)
      : Error("version_error", what) {}
};

}  // namespace entrocf
