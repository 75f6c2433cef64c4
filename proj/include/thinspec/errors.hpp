#pragma once

#include <stdexcept>
#include <string>

namespace thinspec {

/// Error categories surfaced by the library. The CLI maps these to exit codes
/// and structured error JSON.
enum class errc {
    invalid_input,
    dimension_mismatch,
    search_failure,
    unsupported_geometry,
    degenerate_maximum,
    accuracy,
    cap_exceeded,
    use_numeric_path,
    invalid_potential,
    box_too_small,
    degenerate_domain,
    floor_violation,
    convergence_failure,
    invalid_level,
    accuracy_refused,
    io_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::invalid_input: return "invalid-input";
        case errc::dimension_mismatch: return "dimension-mismatch";
        case errc::search_failure: return "search-failure";
        case errc::unsupported_geometry: return "unsupported-geometry";
        case errc::degenerate_maximum: return "degenerate-maximum";
        case errc::accuracy: return "accuracy";
        case errc::cap_exceeded: return "cap-exceeded";
        case errc::use_numeric_path: return "use-numeric-path";
        case errc::invalid_potential: return "invalid-potential";
        case errc::box_too_small: return "box-too-small";
        case errc::degenerate_domain: return "degenerate-domain";
        case errc::floor_violation: return "floor-violation";
        case errc::convergence_failure: return "convergence-failure";
        case errc::invalid_level: return "invalid-level";
        case errc::accuracy_refused: return "accuracy-refused";
        case errc::io_error: return "io-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool cond, errc code, const std::string& what) {
    if (!cond) raise(code, what);
}

}  // namespace thinspec
