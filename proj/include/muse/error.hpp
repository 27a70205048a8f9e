// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace muse {

enum class ErrorKind {
    NotPositiveDefinite,
    RankExceedsDim,
    SingularInnerMatrix,
    BreakdownZeroCurvature,
    NonFinite,
    NonPositiveEigenvalue,
    DimensionMismatch,
    InvalidArgument,
    EmptyObservationSet,
    SolverBreakdown,
    DivergenceDetected,
    LengthMismatch,
    ConfigInvalid,
    FractionSumInvalid,
    HeadsDontDivideWidth,
    ShapeMismatch,
    EmptyClass,
    GraphNotRecorded,
    NonFiniteLoss,
    SingleClass,
    NoPositives,
    SupportViolation,
    InsufficientSeeds,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI's exit-code mapping) can branch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
    {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message)
{
    if (!condition) {
        throw Error(kind, message);
    }
}

} // namespace muse
