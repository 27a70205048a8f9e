// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/pipeline.hpp"

#include "muse/error.hpp"

namespace muse::pipeline {

std::string_view to_string(ImputeMethod method) noexcept
{
    switch (method) {
    case ImputeMethod::Mgp:
        return "mgp";
    case ImputeMethod::Gp:
        return "gp";
    case ImputeMethod::Mean:
        return "mean";
    }
    return "mgp";
}

ImputeMethod parse_impute_method(std::string_view name)
{
    for (auto m : {ImputeMethod::Mgp, ImputeMethod::Gp, ImputeMethod::Mean}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw Error(ErrorKind::ConfigInvalid, "impute.method must be mgp, gp or mean (got \"" + std::string(name) + "\")");
}

mgp::FitResult fit_pooled(const Dataset& fitSet, const ImputeConfig& config)
{
    require(!fitSet.empty(), ErrorKind::InvalidArgument, "no records to fit imputation hyperparameters on");
    const Dataset pool = mgp::pooled_subsample(fitSet, config.poolSize);
    const std::size_t tasks = fitSet.front().variables();
    const std::size_t rank = config.rank == 0 ? tasks : config.rank;
    require(rank <= tasks, ErrorKind::ConfigInvalid, "impute.rank exceeds the number of variables");
    const double theta = config.initialLengthscale > 0.0 ? config.initialLengthscale : mgp::median_pairwise_gap(pool);
    mgp::MgpHyperparameters init = mgp::MgpHyperparameters::initial(tasks, rank, theta, config.seed);
    mgp::FitOptions fit = config.fit;
    fit.independentTasks = config.method == ImputeMethod::Gp;
    if (fit.independentTasks) {
        for (std::size_t i = 0; i < tasks; ++i) {
            for (std::size_t j = 0; j < rank; ++j) {
                if (i != j) {
                    init.taskFactor(i, j) = 0.0;
                }
            }
        }
    }
    return mgp::fit_hyperparameters(pool, init, fit);
}

ImputeOutcome impute(const Dataset& fitSet, const Dataset& targets, const ImputeConfig& config, std::size_t jobs)
{
    ImputeOutcome out;
    if (config.method == ImputeMethod::Mean) {
        out.means = mgp::variable_means(fitSet);
        for (const auto& r : targets) {
            out.records.push_back(mgp::impute_mean(r, out.means));
        }
    } else {
        auto fitted = fit_pooled(fitSet, config);
        out.nllTrace = std::move(fitted.nllTrace);
        out.hyperparameters = fitted.hyperparameters;
        if (config.refitPerRecord) {
            mgp::FitOptions fit = config.fit;
            fit.independentTasks = config.method == ImputeMethod::Gp;
            out.records = mgp::impute_dataset_refit(targets, *out.hyperparameters, fit, jobs);
        } else {
            out.records = mgp::impute_dataset(targets, *out.hyperparameters, jobs, config.fit.solver);
        }
    }
    out.records = apply_mask_choice(std::move(out.records), config.mask);
    return out;
}

std::vector<ImputedRecord> apply_mask_choice(std::vector<ImputedRecord> records, bool mask)
{
    if (!mask) {
        for (auto& r : records) {
            r.mask.fill(0.0);
        }
    }
    return records;
}

} // namespace muse::pipeline
