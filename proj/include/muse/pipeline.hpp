// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/mgp/impute.hpp"
#include "muse/net/training.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace muse::pipeline {

/// mgp: full task covariance; gp: independent per-variable kernels (diagonal B);
/// mean: per-variable training mean.
enum class ImputeMethod { Mgp, Gp, Mean };

std::string_view to_string(ImputeMethod method) noexcept;
/// Throws ConfigInvalid for unknown names.
ImputeMethod parse_impute_method(std::string_view name);

struct ImputeConfig {
    ImputeMethod method = ImputeMethod::Mgp;
    /// Whether masks travel with the imputed records (and feed the mask stream).
    bool mask = true;
    /// Rank q of the task factor; 0 means full rank.
    std::size_t rank = 0;
    std::size_t poolSize = 64;
    /// Initial lengthscale; 0 uses the median pairwise time gap of the pool.
    double initialLengthscale = 0.0;
    /// Refit hyperparameters on every record, starting from the pooled fit.
    bool refitPerRecord = false;
    mgp::FitOptions fit;
    std::uint64_t seed = 0;

    friend bool operator==(const ImputeConfig&, const ImputeConfig&) = default;
};

struct ImputeOutcome {
    std::vector<ImputedRecord> records;
    std::optional<mgp::MgpHyperparameters> hyperparameters;
    std::vector<double> means;
    std::vector<double> nllTrace;
};

/// Hyperparameters fitted on a pooled subsample of `fitSet`.
mgp::FitResult fit_pooled(const Dataset& fitSet, const ImputeConfig& config);

/// Imputes `targets` with parameters learned from `fitSet` (often the training split).
ImputeOutcome impute(const Dataset& fitSet, const Dataset& targets, const ImputeConfig& config,
                     std::size_t jobs = 1);

/// Zeroes the masks when the configuration says they are not used.
std::vector<ImputedRecord> apply_mask_choice(std::vector<ImputedRecord> records, bool mask);

} // namespace muse::pipeline
