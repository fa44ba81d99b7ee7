#include "trl/error.hpp"

namespace trl {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NotCoprime: return "NotCoprime";
        case ErrorCode::EvenModulus: return "EvenModulus";
        case ErrorCode::ScaleExceeded: return "ScaleExceeded";
        case ErrorCode::CorruptCache: return "CorruptCache";
        case ErrorCode::Io: return "Io";
        case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
        case ErrorCode::NyquistViolation: return "NyquistViolation";
        case ErrorCode::EmptyArcSet: return "EmptyArcSet";
        case ErrorCode::EmptyShell: return "EmptyShell";
        case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    }
    return "Unknown";
}

}  // namespace trl
