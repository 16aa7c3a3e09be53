#pragma once

#include <stdexcept>
#include <string>

namespace ncu {

/// Input or model rejected: schema violations, NA failures, refused
/// utilities, ill-posed regimes. Maps to process exit code 1.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    /// Short machine-readable identifier, e.g. "na_violated".
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Failure while computing: budget exhaustion, window breaches, internal
/// numerical trouble. Maps to process exit code 2.
class ExecutionError : public std::runtime_error {
public:
    ExecutionError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace ncu
