#include "chemrep/errors.hpp"

namespace chemrep {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "InvalidArgument";
        case ErrorKind::stability_violation: return "StabilityViolation";
        case ErrorKind::solver_failure: return "SolverFailure";
        case ErrorKind::negative_initial_data: return "NegativeInitialData";
        case ErrorKind::kappa_violation: return "KappaViolation";
        case ErrorKind::grid_mismatch: return "GridMismatch";
        case ErrorKind::line_search_failure: return "LineSearchFailure";
        case ErrorKind::config_error: return "ConfigError";
        case ErrorKind::io_error: return "IoError";
    }
    return "Unknown";
}

}  // namespace chemrep
