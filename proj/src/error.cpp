#include "stickytail/error.hpp"

namespace stickytail {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::DegenerateDiscriminant: return "DegenerateDiscriminant";
        case ErrorCode::OutsideBranchCut: return "OutsideBranchCut";
        case ErrorCode::BracketFailure: return "BracketFailure";
        case ErrorCode::NoFiniteCandidate: return "NoFiniteCandidate";
        case ErrorCode::InconsistentSubcase: return "InconsistentSubcase";
        case ErrorCode::UnreachableRegime: return "UnreachableRegime";
        case ErrorCode::ReflectionNotSubstochastic: return "ReflectionNotSubstochastic";
        case ErrorCode::BlockTooSmall: return "BlockTooSmall";
        case ErrorCode::NonpositiveCoefficient: return "NonpositiveCoefficient";
        case ErrorCode::MissingCoefficient: return "MissingCoefficient";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::InsufficientExceedances: return "InsufficientExceedances";
        case ErrorCode::NoComplementarySolution: return "NoComplementarySolution";
        case ErrorCode::GridOutOfRange: return "GridOutOfRange";
        case ErrorCode::InsufficientTailData: return "InsufficientTailData";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace stickytail
