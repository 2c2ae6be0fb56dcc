#pragma once

#include <stdexcept>
#include <string>

namespace revar {

/// File-system or container-format failure. CLI exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input violates a documented precondition. CLI exit code 3.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure during computation (degenerate decomposition,
/// unstable recursion, non-finite state). CLI exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace revar
