#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace critflow {

namespace errors_detail {
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}
}  // namespace errors_detail

struct CritflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// domain / meshing
struct InvalidDomain : CritflowError { using CritflowError::CritflowError; };
struct MeshFailure : CritflowError { using CritflowError::CritflowError; };

// mesh file I/O
struct ParseError : CritflowError {
    std::size_t line;
    ParseError(std::size_t line_, const std::string& msg)
        : CritflowError("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};
struct ValidationError : CritflowError { using CritflowError::CritflowError; };

// coefficients
struct EvalError : CritflowError { using CritflowError::CritflowError; };

// FEM
struct DegenerateElement : CritflowError { using CritflowError::CritflowError; };
struct NonpositiveCoefficient : CritflowError { using CritflowError::CritflowError; };
struct NoConvergence : CritflowError {
    double residual;
    explicit NoConvergence(double r)
        : CritflowError("solver did not converge, relative residual " + errors_detail::num(r)),
          residual(r) {}
};
struct OutsideDomain : CritflowError { using CritflowError::CritflowError; };

// critical point analysis
struct CriticalOnContour : CritflowError { using CritflowError::CritflowError; };
struct NotClosed : CritflowError { using CritflowError::CritflowError; };
struct IndexNotInteger : CritflowError {
    double value;
    explicit IndexNotInteger(double v, const std::string& extra = "")
        : CritflowError("winding index " + errors_detail::num(v) + " is not a usable integer" +
                        (extra.empty() ? "" : " (" + extra + ")")),
          value(v) {}
};
struct OverlappingPatches : CritflowError { using CritflowError::CritflowError; };

// oracles
struct OutOfRange : CritflowError { using CritflowError::CritflowError; };
struct MapSingular : CritflowError { using CritflowError::CritflowError; };
struct NonVanishingTrace : CritflowError { using CritflowError::CritflowError; };

// configuration
struct ConfigError : CritflowError { using CritflowError::CritflowError; };

}  // namespace critflow
