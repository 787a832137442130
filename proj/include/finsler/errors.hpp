#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace finsler {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller-supplied argument (non-positive step, too few samples, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or undefined value produced while evaluating a field.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// The point lies outside the metric's regularity domain.
class RegularityError : public Error {
 public:
  using Error::Error;
};

/// Arguments outside the mathematical domain of a formula (b^2 < s^2, b = 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateFlagError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_valid_t)
      : Error(what + " (last valid t = " + std::to_string(last_valid_t) + ")"),
        last_valid_t_(last_valid_t) {}
  double last_valid_t() const noexcept { return last_valid_t_; }

 private:
  double last_valid_t_;
};

/// Exact-arithmetic failure (division by the zero rational function).
class ArithmeticError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error("config error at \"" + path + "\": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace finsler
