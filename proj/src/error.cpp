#include "ivdr/error.hpp"

namespace ivdr {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::DegenerateOutcome: return "DegenerateOutcome";
    case ErrorCode::SeparationSuspected: return "SeparationSuspected";
    case ErrorCode::BoundarySolution: return "BoundarySolution";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::ReplicateFailure: return "ReplicateFailure";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::NonNumeric: return "NonNumeric";
    case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

}  // namespace ivdr
