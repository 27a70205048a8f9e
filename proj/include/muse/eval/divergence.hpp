// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace muse::eval {

/// Throws InvalidArgument unless entries are >= 0 and sum to 1 within 1e-9.
void validate_probability(std::span<const double> p);

/// sum p_j log(p_j / q_j), with 0 log 0 = 0. Throws SupportViolation when some q_j = 0 < p_j.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// -sum t_j log q_j.
double cross_entropy(std::span<const double> target, std::span<const double> q);

std::vector<double> arithmetic_mean(std::span<const std::vector<double>> distributions);

/// Normalized geometric mean.
std::vector<double> geometric_mean(std::span<const std::vector<double>> distributions);

/// Seed-to-seed spread of one model's predictions.
struct VarianceEstimate {
    /// Mean over records and seeds of KL(barycenter || prediction), barycenter = arithmetic mean.
    double arithmetic = 0.0;
    /// Same with the normalized geometric mean as barycenter.
    double geometric = 0.0;
};

/// predictions[seed][record] is the positive-class probability. Throws InsufficientSeeds for < 2 seeds.
VarianceEstimate ensemble_variance(const std::vector<std::vector<double>>& predictions);

struct EnsembleVarianceReport {
    VarianceEstimate multiBranch;
    VarianceEstimate singleBranch;
    /// Fraction of paired resamples with V_MB <= V_SB (arithmetic barycenter).
    double pairedWinRate = 0.0;
    std::size_t resamples = 0;
};

/// Compares two models trained over the same seeds. The paired-resample rate
/// draws seed subsets with replacement (same indices for both models).
EnsembleVarianceReport ensemble_variance_report(const std::vector<std::vector<double>>& multiBranch,
                                                const std::vector<std::vector<double>>& singleBranch,
                                                std::size_t resamples = 1000, std::uint64_t seed = 0);

} // namespace muse::eval
