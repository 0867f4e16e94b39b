#pragma once

#include <stdexcept>
#include <string>

namespace gevrey {

enum class ErrorCode {
    argument,
    domain,
    not_stiff,
    numeric,
    initially_elliptic,
    inconclusive,
    odd_degeneracy,
    degenerate_pivot,
    decomposition,
    overflow,
    stiffness,
    diagnostics,
    truncation,
    divergence,
    precondition,
    io
};

inline const char* to_string(ErrorCode c)
{
    switch (c) {
    case ErrorCode::argument: return "argument";
    case ErrorCode::domain: return "domain";
    case ErrorCode::not_stiff: return "not_stiff";
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::initially_elliptic: return "initially_elliptic";
    case ErrorCode::inconclusive: return "inconclusive";
    case ErrorCode::odd_degeneracy: return "odd_degeneracy";
    case ErrorCode::degenerate_pivot: return "degenerate_pivot";
    case ErrorCode::decomposition: return "decomposition";
    case ErrorCode::overflow: return "overflow";
    case ErrorCode::stiffness: return "stiffness";
    case ErrorCode::diagnostics: return "diagnostics";
    case ErrorCode::truncation: return "truncation";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace gevrey
