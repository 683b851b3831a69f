#pragma once

#include <stdexcept>
#include <string>

namespace qpw {

enum class ErrorKind {
    UnsupportedMode,
    UnsupportedPotential,
    QuadratureError,
    EdgeSearchError,
    OutOfRange,
    NormalizationError,
    BranchPointProximity,
    NearDegenerate,
    ContourError,
    GeometryError,
    ContinuationAmbiguity,
    ConsistencyError,
    InvariantViolation,
    ReclassifyAsResonant,
    WrongRegime,
    NumericsError,
};

const char* to_string(ErrorKind k);

// Hypothesis failures map to CLI exit code 2, everything else to 3.
bool is_hypothesis_failure(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace qpw
