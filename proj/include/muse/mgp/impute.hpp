// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/mgp/likelihood.hpp"

#include <string>
#include <vector>

namespace muse::mgp {

/// Filled record plus its missingness mask (1 on originally missing cells).
using ImputationResult = ImputedRecord;

/// K_{QO} Sigma^{-1} y for arbitrary query points given an assembled observation kernel.
std::vector<double> posterior_mean(const AssembledKernel& observed, std::span<const double> y,
                                   std::span<const ObservationPoint> queries, const MgpHyperparameters& hp,
                                   const SolverOptions& options = {});

/// Missing cells get K_{UO} Sigma^{-1} y (zero prior mean); observed cells are copied.
ImputationResult impute_posterior_mean(const LongitudinalRecord& record, const MgpHyperparameters& hp,
                                       const SolverOptions& options = {});

/// Order-preserving, deterministic regardless of `jobs`. Per-record failures are
/// gathered and rethrown once with the offending record ids.
std::vector<ImputationResult> impute_dataset(const Dataset& dataset, const MgpHyperparameters& hp,
                                             std::size_t jobs = 1, const SolverOptions& options = {});

/// Refits Theta on each record separately (starting from `init`) before imputing it.
std::vector<ImputationResult> impute_dataset_refit(const Dataset& dataset, const MgpHyperparameters& init,
                                                   const FitOptions& fit, std::size_t jobs = 1);

/// Per-variable mean of observed training values (0 for a never-observed variable).
std::vector<double> variable_means(const Dataset& training);

ImputationResult impute_mean(const LongitudinalRecord& record, std::span<const double> means);

/// Observed values unchanged, missing cells zero (no imputation).
ImputationResult impute_zero(const LongitudinalRecord& record);

} // namespace muse::mgp
