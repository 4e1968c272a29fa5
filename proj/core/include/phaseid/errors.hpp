#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phaseid {

/// Failure categories. The CLI maps these onto its exit-code contract.
enum class ErrorKind {
    InvalidInput,
    Io,
    Parse,
    DuplicateSample,
    Validation,
    Alignment,
    InsufficientOverlap,
    InsufficientData,
    InsufficientVariance,
    SolverDivergence,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    /// `line` is 1-based; 0 means "not tied to an input line".
    Error(ErrorKind kind, const std::string& message, std::size_t line)
        : std::runtime_error(message + " (line " + std::to_string(line) + ")"),
          kind_(kind), line_(line) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }

private:
    ErrorKind kind_;
    std::size_t line_ = 0;
};

}  // namespace phaseid
