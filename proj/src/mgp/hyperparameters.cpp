// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/mgp/hyperparameters.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace muse::mgp {

void MgpHyperparameters::validate() const
{
    const std::size_t m = tasks();
    const std::size_t q = rank();
    require(m >= 1 && q >= 1 && q <= m, ErrorKind::InvalidArgument, "hyperparameters: need 1 <= q <= M");
    require(noiseVariances.size() == m, ErrorKind::InvalidArgument, "hyperparameters: sigma2 length must be M");
    require(taskFactor.all_finite(), ErrorKind::InvalidArgument, "hyperparameters: B has non-finite entries");
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < q; ++j) {
            require(taskFactor(i, j) == 0.0, ErrorKind::InvalidArgument, "hyperparameters: B must be lower triangular");
        }
    }
    for (double s : noiseVariances) {
        require(std::isfinite(s) && s > kNoiseFloor, ErrorKind::InvalidArgument,
                "hyperparameters: sigma2 must exceed the noise floor");
    }
    require(std::isfinite(lengthscale) && lengthscale > 0.0, ErrorKind::InvalidArgument,
            "hyperparameters: theta must be positive");
}

Matrix MgpHyperparameters::task_covariance() const
{
    return matmul_nt(taskFactor, taskFactor);
}

std::size_t MgpHyperparameters::unconstrained_size(std::size_t tasks, std::size_t rank) noexcept
{
    return factor_slot(tasks, 0, rank) + tasks + 1;
}

std::size_t MgpHyperparameters::factor_slot(std::size_t i, std::size_t j, std::size_t rank) noexcept
{
    // Rows 0..rank-1 contribute 1, 2, ..., rank entries; later rows `rank` each.
    const std::size_t head = std::min(i, rank);
    std::size_t offset = head * (head + 1) / 2;
    if (i > rank) {
        offset += (i - rank) * rank;
    }
    return offset + j;
}

std::vector<double> MgpHyperparameters::to_unconstrained() const
{
    const std::size_t m = tasks();
    const std::size_t q = rank();
    std::vector<double> raw(unconstrained_size(m, q));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= std::min(i, q - 1); ++j) {
            raw[factor_slot(i, j, q)] = taskFactor(i, j);
        }
    }
    const std::size_t base = factor_slot(m, 0, q);
    for (std::size_t i = 0; i < m; ++i) {
        raw[base + i] = std::log(noiseVariances[i] - kNoiseFloor);
    }
    raw[base + m] = std::log(lengthscale);
    return raw;
}

MgpHyperparameters MgpHyperparameters::from_unconstrained(std::span<const double> raw, std::size_t tasks,
                                                          std::size_t rank)
{
    require(raw.size() == unconstrained_size(tasks, rank), ErrorKind::DimensionMismatch,
            "hyperparameters: unconstrained vector length");
    MgpHyperparameters hp;
    hp.taskFactor = Matrix(tasks, rank);
    for (std::size_t i = 0; i < tasks; ++i) {
        for (std::size_t j = 0; j <= std::min(i, rank - 1); ++j) {
            hp.taskFactor(i, j) = raw[factor_slot(i, j, rank)];
        }
    }
    const std::size_t base = factor_slot(tasks, 0, rank);
    hp.noiseVariances.resize(tasks);
    for (std::size_t i = 0; i < tasks; ++i) {
        hp.noiseVariances[i] = kNoiseFloor + std::exp(raw[base + i]);
    }
    hp.lengthscale = std::exp(raw[base + tasks]);
    return hp;
}

MgpHyperparameters MgpHyperparameters::initial(std::size_t tasks, std::size_t rank, double lengthscale,
                                               std::uint64_t seed)
{
    require(tasks >= 1 && rank >= 1 && rank <= tasks, ErrorKind::InvalidArgument, "initial: need 1 <= q <= M");
    require(lengthscale > 0.0, ErrorKind::InvalidArgument, "initial: lengthscale must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    MgpHyperparameters hp;
    hp.taskFactor = Matrix(tasks, rank);
    for (std::size_t i = 0; i < tasks; ++i) {
        for (std::size_t j = 0; j <= std::min(i, rank - 1); ++j) {
            hp.taskFactor(i, j) = (i == j ? 1.0 : 0.0) + 0.01 * normal(rng);
        }
    }
    hp.noiseVariances.assign(tasks, 0.1);
    hp.lengthscale = lengthscale;
    return hp;
}

} // namespace muse::mgp
