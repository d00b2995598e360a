#include "amlab/errors.hpp"

namespace amlab {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kInsufficientDepth: return "insufficient-depth";
    case ErrorCode::kInvalidHoles: return "invalid-holes";
    case ErrorCode::kInvalidMass: return "invalid-mass";
    case ErrorCode::kUnbalancedJumps: return "unbalanced-jumps";
    case ErrorCode::kNotOneHole: return "not-one-hole";
    case ErrorCode::kNotFullGapMeasure: return "not-full-gap-measure";
    case ErrorCode::kIntegrationFailure: return "integration-failure";
    case ErrorCode::kMinimizationFailed: return "minimization-failed";
    }
    return "unknown";
}

} // namespace amlab
