#pragma once

#include <stdexcept>
#include <string>

namespace courseforge {

// Maps onto the CLI exit-status contract: usage problems exit 2, domain
// failures (infeasible plans, illegal transitions, ...) exit 1.
enum class ErrorCategory { kUser, kDomain, kRetryable };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& message)
      : std::runtime_error(message), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const { return category_; }
  // Short machine-readable tag, e.g. "parse", "infeasible", "illegal-transition".
  const std::string& code() const { return code_; }

 private:
  ErrorCategory category_;
  std::string code_;
};

inline Error user_error(std::string code, const std::string& message) {
  return Error(ErrorCategory::kUser, std::move(code), message);
}

inline Error domain_error(std::string code, const std::string& message) {
  return Error(ErrorCategory::kDomain, std::move(code), message);
}

}  // namespace courseforge
