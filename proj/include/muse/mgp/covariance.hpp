// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/linalg/dense.hpp"
#include "muse/mgp/hyperparameters.hpp"
#include "muse/record.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace muse::mgp {

/// Relative jitter added to the kernel diagonal: 1e-6 times the mean kernel diagonal.
inline constexpr double kRelativeJitter = 1e-6;

struct ObservationPoint {
    double time = 0.0;
    std::size_t task = 0;
};

/// Sigma = (L B B^T L^T) .* K_t + E over one ordered index set.
struct AssembledKernel {
    /// Full covariance including noise and jitter.
    Matrix matrix;
    /// Kernel part only, (L B B^T L^T) .* K_t, no noise and no jitter.
    Matrix kernel;
    /// sigma^2_{m_i} + jitter for each point.
    std::vector<double> noise;
    /// O x M one-hot task indicator.
    Matrix indicator;
    std::vector<ObservationPoint> points;
    double jitter = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

std::vector<ObservationPoint> observation_points(const LongitudinalRecord& record, std::span<const CellIndex> cells);

/// Throws EmptyObservationSet when `cells` is empty.
AssembledKernel assemble_covariance(const LongitudinalRecord& record, const MgpHyperparameters& hp,
                                    std::span<const CellIndex> cells);

AssembledKernel assemble_covariance(std::span<const ObservationPoint> points, const MgpHyperparameters& hp);

/// Noise-free cross-covariance between two point sets: [B B^T]_{m m'} k(t, t').
Matrix cross_covariance(std::span<const ObservationPoint> rows, std::span<const ObservationPoint> cols,
                        const MgpHyperparameters& hp);

/// Observed values of `record` in the order of `cells`.
std::vector<double> gather(const LongitudinalRecord& record, std::span<const CellIndex> cells);

/// One draw of the full T x M grid (noise included) from the MGP prior at `times`.
Matrix sample_prior(std::span<const double> times, const MgpHyperparameters& hp, std::uint64_t seed);

} // namespace muse::mgp
