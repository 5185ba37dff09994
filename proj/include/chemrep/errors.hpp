#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chemrep {

enum class ErrorKind {
    invalid_argument,
    stability_violation,
    solver_failure,
    negative_initial_data,
    kappa_violation,
    grid_mismatch,
    line_search_failure,
    config_error,
    io_error,
};

/// Machine-readable name, e.g. "StabilityViolation".
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) fail(kind, message);
}

}  // namespace chemrep
