#ifndef DIAR_COMMON_HPP
#define DIAR_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace diar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or parameter combination.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Input data violates a precondition (too short, empty, degenerate).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

/// Malformed file content. Carries the path and, when known, the line.
class FormatError : public Error {
 public:
  FormatError(const std::string& path, const std::string& msg)
      : Error(path + ": " + msg), path_(path), line_(0) {}
  FormatError(const std::string& path, long line, const std::string& msg)
      : Error(path + ":" + std::to_string(line) + ": " + msg),
        path_(path),
        line_(line) {}
  const std::string& path() const { return path_; }
  long line() const { return line_; }

 private:
  std::string path_;
  long line_;
};

}  // namespace diar

#endif  // DIAR_COMMON_HPP
