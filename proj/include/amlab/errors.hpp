#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amlab {

enum class ErrorCode {
    kInvalidInput,
    kInsufficientDepth,
    kInvalidHoles,
    kInvalidMass,
    kUnbalancedJumps,
    kNotOneHole,
    kNotFullGapMeasure,
    kIntegrationFailure,
    kMinimizationFailed,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Error raised by every module operation; `code()` is the machine-readable kind.
class LabError : public std::runtime_error {
public:
    LabError(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw LabError(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

} // namespace amlab
