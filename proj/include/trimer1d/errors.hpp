#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trimer1d {

/// Machine-readable failure categories. The string form is what the CLI
/// writes into its error record.
enum class ErrorCode {
    domain,
    invalid_argument,
    dimension_mismatch,
    contact_not_representable,
    threshold_violation,
    singular_argument,
    shallow_channel,
    no_convergence,
    grid_too_coarse,
    mixed_parity,
    config_invalid,
    io_failure,
    solver_failure,
};

inline std::string_view to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::contact_not_representable: return "contact-not-representable";
    case ErrorCode::threshold_violation: return "threshold-violation";
    case ErrorCode::singular_argument: return "singular-argument";
    case ErrorCode::shallow_channel: return "shallow-channel";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::grid_too_coarse: return "grid-too-coarse";
    case ErrorCode::mixed_parity: return "mixed-parity";
    case ErrorCode::config_invalid: return "config-invalid";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::solver_failure: return "solver-failure";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

} // namespace trimer1d
