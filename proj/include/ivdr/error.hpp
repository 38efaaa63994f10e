#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ivdr {

enum class ErrorCode {
    InvalidArgument,
    RankDeficient,
    NonFiniteObjective,
    DegenerateOutcome,
    SeparationSuspected,
    BoundarySolution,
    LevelOutOfRange,
    ReplicateFailure,
    MissingColumn,
    EmptyAfterFiltering,
    NonNumeric,
    IoFailure,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; code() tells the
// caller which contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ivdr
