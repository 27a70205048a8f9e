// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace muse::mgp {

/// Theta = {B, sigma^2, theta}: task factor, per-task noise variances and the
/// shared squared-exponential lengthscale.
///
/// Optimization works on an unconstrained vector laid out as
/// [lower-triangular B entries, row-major] ++ [log(sigma^2_m - floor)] ++ [log theta].
struct MgpHyperparameters {
    static constexpr double kNoiseFloor = 1e-9;

    Matrix taskFactor;               // M x q, lower triangular
    std::vector<double> noiseVariances;
    double lengthscale = 1.0;

    [[nodiscard]] std::size_t tasks() const noexcept { return taskFactor.rows(); }
    [[nodiscard]] std::size_t rank() const noexcept { return taskFactor.cols(); }

    /// Throws InvalidArgument when shapes, triangularity or positivity fail.
    void validate() const;

    /// B B^T.
    [[nodiscard]] Matrix task_covariance() const;

    [[nodiscard]] std::vector<double> to_unconstrained() const;
    static MgpHyperparameters from_unconstrained(std::span<const double> raw, std::size_t tasks, std::size_t rank);
    static std::size_t unconstrained_size(std::size_t tasks, std::size_t rank) noexcept;

    /// Index of B(i, j) in the unconstrained vector (j <= i, j < rank).
    static std::size_t factor_slot(std::size_t i, std::size_t j, std::size_t rank) noexcept;

    /// B = I + 0.01 N(0,1) (lower triangle), sigma^2 = 0.1, theta = `lengthscale`.
    static MgpHyperparameters initial(std::size_t tasks, std::size_t rank, double lengthscale, std::uint64_t seed);

    friend bool operator==(const MgpHyperparameters&, const MgpHyperparameters&) = default;
};

} // namespace muse::mgp
