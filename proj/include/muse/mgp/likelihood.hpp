// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/mgp/covariance.hpp"
#include "muse/optim.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace muse::mgp {

enum class SolveMethod { Dense, Mpcg };

enum class ProbeMode {
    /// d_i ~ N(0, P) drawn from the preconditioner factors.
    Gaussian,
    /// d_i = sqrt(n) L e_i with L L^T = P, i = 1..n. Quadrature is then exact
    /// (given enough CG steps), which makes the iterative path testable
    /// against finite differences on small records.
    Exhaustive,
};

struct SolverOptions {
    SolveMethod method = SolveMethod::Dense;
    std::size_t probes = 10;
    std::size_t preconditionerRank = 10;
    std::size_t maxIterations = 100;
    double tolerance = 1e-8;
    ProbeMode probeMode = ProbeMode::Gaussian;
    std::uint64_t seed = 0;
};

struct NllResult {
    double nll = 0.0;
    /// d nll / d(unconstrained hyperparameters), see MgpHyperparameters.
    std::vector<double> gradient;
    /// Solver column iterations; empty on the dense path.
    std::vector<std::size_t> iterations;
};

/// L = log|Sigma| + y^T Sigma^{-1} y + (O/2) log(2 pi), over the record's observed cells.
///
/// Derivative: dL = Tr(Sigma^{-1} dSigma) - y^T Sigma^{-1} dSigma Sigma^{-1} y.
/// Solver failures surface as SolverBreakdown.
NllResult nll_and_gradient(const LongitudinalRecord& record, const MgpHyperparameters& hp,
                           const SolverOptions& options = {});

NllResult nll_and_gradient(const AssembledKernel& kernel, std::span<const double> y, const MgpHyperparameters& hp,
                           const SolverOptions& options = {});

/// Contracts a symmetric weight matrix W (O x O) against dSigma/dphi for every
/// unconstrained coordinate phi: returns sum_ij W_ij dSigma_ij / dphi.
std::vector<double> contract_covariance_derivatives(const AssembledKernel& kernel, const Matrix& weights,
                                                    const MgpHyperparameters& hp);

/// dSigma/dphi_k as a dense matrix (small problems and tests).
Matrix covariance_derivative(const AssembledKernel& kernel, const MgpHyperparameters& hp, std::size_t coordinate);

struct FitOptions {
    std::size_t maxIterations = 200;
    AdamConfig adam{0.05, 0.9, 0.999, 1e-8, 0.0};
    /// Stop once the gradient 2-norm drops below this.
    double gradientTolerance = 1e-6;
    /// Keep B diagonal (independent per-variable GPs).
    bool independentTasks = false;
    SolverOptions solver;
};

struct FitResult {
    MgpHyperparameters hyperparameters;
    /// Summed NLL at each iterate before its update.
    std::vector<double> nllTrace;
    std::size_t iterations = 0;
};

/// ADAM over the summed NLL of `pool`. Throws DivergenceDetected on a non-finite NLL.
FitResult fit_hyperparameters(std::span<const LongitudinalRecord> pool, const MgpHyperparameters& init,
                              const FitOptions& options = {});

/// Every (N / count)-th record, walking the dataset round-robin, at most `count` records.
Dataset pooled_subsample(const Dataset& dataset, std::size_t count = 64);

/// Median |t_i - t_j| over all within-record time pairs; 1 when no pair exists.
double median_pairwise_gap(std::span<const LongitudinalRecord> records);

} // namespace muse::mgp
