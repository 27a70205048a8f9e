// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/error.hpp"

namespace muse {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::RankExceedsDim: return "RankExceedsDim";
    case ErrorKind::SingularInnerMatrix: return "SingularInnerMatrix";
    case ErrorKind::BreakdownZeroCurvature: return "BreakdownZeroCurvature";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyObservationSet: return "EmptyObservationSet";
    case ErrorKind::SolverBreakdown: return "SolverBreakdown";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::FractionSumInvalid: return "FractionSumInvalid";
    case ErrorKind::HeadsDontDivideWidth: return "HeadsDontDivideWidth";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::GraphNotRecorded: return "GraphNotRecorded";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::NoPositives: return "NoPositives";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::InsufficientSeeds: return "InsufficientSeeds";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace muse
