#include <collab/error.hpp>

namespace collab {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CorrelationOutOfRange: return "CorrelationOutOfRange";
    case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorCode::InvalidSubset: return "InvalidSubset";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NoSamples: return "NoSamples";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::DegenerateRho23: return "DegenerateRho23";
    case ErrorCode::WeightMismatch: return "WeightMismatch";
    case ErrorCode::AllInfinite: return "AllInfinite";
    case ErrorCode::Unidentifiable: return "Unidentifiable";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

} // namespace collab
