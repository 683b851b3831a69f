#include "qpw/error.hpp"

namespace qpw {

const char* to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::UnsupportedMode: return "UnsupportedMode";
    case ErrorKind::UnsupportedPotential: return "UnsupportedPotential";
    case ErrorKind::QuadratureError: return "QuadratureError";
    case ErrorKind::EdgeSearchError: return "EdgeSearchError";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NormalizationError: return "NormalizationError";
    case ErrorKind::BranchPointProximity: return "BranchPointProximity";
    case ErrorKind::NearDegenerate: return "NearDegenerate";
    case ErrorKind::ContourError: return "ContourError";
    case ErrorKind::GeometryError: return "GeometryError";
    case ErrorKind::ContinuationAmbiguity: return "ContinuationAmbiguity";
    case ErrorKind::ConsistencyError: return "ConsistencyError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::ReclassifyAsResonant: return "ReclassifyAsResonant";
    case ErrorKind::WrongRegime: return "WrongRegime";
    case ErrorKind::NumericsError: return "NumericsError";
    }
    return "Unknown";
}

bool is_hypothesis_failure(ErrorKind k)
{
    switch (k) {
    case ErrorKind::UnsupportedMode:
    case ErrorKind::UnsupportedPotential:
    case ErrorKind::GeometryError:
    case ErrorKind::InvariantViolation:
    case ErrorKind::WrongRegime:
        return true;
    default:
        return false;
    }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
{
}

}  // namespace qpw
