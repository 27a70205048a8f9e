// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/mgp/impute.hpp"

#include "muse/linalg/mpcg.hpp"
#include "muse/parallel.hpp"

namespace muse::mgp {
namespace {

ImputationResult copy_observed(const LongitudinalRecord& record)
{
    return {record.id(), record.label(), record.times(), record.values(), record.missing_mask()};
}

Matrix solve_weights(const AssembledKernel& kernel, std::span<const double> y, const SolverOptions& options)
{
    if (options.method == SolveMethod::Dense) {
        return linalg::cholesky_solve(linalg::DenseSymmetricMatrix(kernel.matrix), Matrix::column(y));
    }
    const std::size_t r = std::clamp<std::size_t>(options.preconditionerRank, 1, kernel.size());
    const linalg::Preconditioner p(linalg::pivoted_cholesky(linalg::DenseSymmetricMatrix(kernel.kernel), r),
                                   kernel.noise);
    linalg::SolverWorkspace ws{Matrix::column(y), options.maxIterations, options.tolerance, {}};
    return linalg::mpcg_batch(linalg::dense_operator(kernel.matrix), ws, p).solution;
}

} // namespace

std::vector<double> posterior_mean(const AssembledKernel& observed, std::span<const double> y,
                                   std::span<const ObservationPoint> queries, const MgpHyperparameters& hp,
                                   const SolverOptions& options)
{
    require(y.size() == observed.size(), ErrorKind::DimensionMismatch, "posterior_mean: y length");
    const Matrix alpha = solve_weights(observed, y, options);
    const Matrix mean = matmul(cross_covariance(queries, observed.points, hp), alpha);
    return {mean.values().begin(), mean.values().end()};
}

ImputationResult impute_posterior_mean(const LongitudinalRecord& record, const MgpHyperparameters& hp,
                                       const SolverOptions& options)
{
    hp.validate();
    require(record.variables() == hp.tasks(), ErrorKind::DimensionMismatch,
            "record " + record.id() + ": variable count differs from M");
    ImputationResult out = copy_observed(record);
    if (record.missing().empty() || record.observed().empty()) {
        // Nothing to fill, or nothing to condition on: the prior mean is zero.
        return out;
    }
    const AssembledKernel kernel = assemble_covariance(record, hp, record.observed());
    const std::vector<double> y = gather(record, record.observed());
    const auto queries = observation_points(record, record.missing());
    std::vector<double> mean;
    try {
        mean = posterior_mean(kernel, y, queries, hp, options);
    } catch (const Error& e) {
        throw Error(ErrorKind::SolverBreakdown, "record " + record.id() + ": " + e.what());
    }
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& c = record.missing()[i];
        out.imputed(c.time, c.variable) = mean[i];
    }
    return out;
}

std::vector<ImputationResult> impute_dataset(const Dataset& dataset, const MgpHyperparameters& hp, std::size_t jobs,
                                             const SolverOptions& options)
{
    std::vector<ImputationResult> out(dataset.size());
    parallel_for(
        dataset.size(), jobs, [&](std::size_t i) { out[i] = impute_posterior_mean(dataset[i], hp, options); },
        [&](std::size_t i) { return "record " + dataset[i].id(); });
    return out;
}

std::vector<ImputationResult> impute_dataset_refit(const Dataset& dataset, const MgpHyperparameters& init,
                                                   const FitOptions& fit, std::size_t jobs)
{
    std::vector<ImputationResult> out(dataset.size());
    parallel_for(
        dataset.size(), jobs,
        [&](std::size_t i) {
            const auto& record = dataset[i];
            if (record.observed().empty()) {
                out[i] = copy_observed(record);
                return;
            }
            const auto fitted = fit_hyperparameters(std::span(&record, 1), init, fit);
            out[i] = impute_posterior_mean(record, fitted.hyperparameters, fit.solver);
        },
        [&](std::size_t i) { return "record " + dataset[i].id(); });
    return out;
}

std::vector<double> variable_means(const Dataset& training)
{
    if (training.empty()) {
        return {};
    }
    const std::size_t m = training.front().variables();
    std::vector<double> sum(m, 0.0);
    std::vector<double> count(m, 0.0);
    for (const auto& r : training) {
        require(r.variables() == m, ErrorKind::DimensionMismatch, "variable_means: records disagree on M");
        for (const auto& c : r.observed()) {
            sum[c.variable] += r.values()(c.time, c.variable);
            count[c.variable] += 1.0;
        }
    }
    for (std::size_t v = 0; v < m; ++v) {
        sum[v] = count[v] > 0.0 ? sum[v] / count[v] : 0.0;
    }
    return sum;
}

ImputationResult impute_mean(const LongitudinalRecord& record, std::span<const double> means)
{
    require(means.size() == record.variables(), ErrorKind::DimensionMismatch,
            "record " + record.id() + ": mean vector length differs from M");
    ImputationResult out = copy_observed(record);
    for (const auto& c : record.missing()) {
        out.imputed(c.time, c.variable) = means[c.variable];
    }
    return out;
}

ImputationResult impute_zero(const LongitudinalRecord& record)
{
    return copy_observed(record);
}

} // namespace muse::mgp
