#pragma once

#include <stdexcept>
#include <string>

namespace dbs {

// Failure classes map one-to-one onto the CLI exit codes.
enum class ErrorCategory {
  Input = 1,
  NonConvergence = 2,
  Numerical = 3,
};

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message, ErrorCategory category)
      : std::runtime_error(kind + ": " + message),
        kind_(std::move(kind)),
        detail_(message),
        category_(category) {}

  const std::string& kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }
  ErrorCategory category() const noexcept { return category_; }

 private:
  std::string kind_;
  std::string detail_;
  ErrorCategory category_;
};

inline Error input_error(std::string kind, const std::string& message) {
  return Error(std::move(kind), message, ErrorCategory::Input);
}

inline Error convergence_error(std::string kind, const std::string& message) {
  return Error(std::move(kind), message, ErrorCategory::NonConvergence);
}

inline Error numerical_error(std::string kind, const std::string& message) {
  return Error(std::move(kind), message, ErrorCategory::Numerical);
}

}  // namespace dbs
