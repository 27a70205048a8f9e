// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/eval/divergence.hpp"

#include "muse/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace muse::eval {

void validate_probability(std::span<const double> p)
{
    double sum = 0.0;
    for (double v : p) {
        require(std::isfinite(v) && v >= 0.0, ErrorKind::InvalidArgument, "probability entries must be >= 0");
        sum += v;
    }
    require(!p.empty() && std::abs(sum - 1.0) <= 1e-9, ErrorKind::InvalidArgument,
            "probability vector must sum to 1");
}

double kl_divergence(std::span<const double> p, std::span<const double> q)
{
    require(p.size() == q.size(), ErrorKind::DimensionMismatch, "kl_divergence: length mismatch");
    validate_probability(p);
    validate_probability(q);
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] == 0.0) {
            continue;
        }
        require(q[j] > 0.0, ErrorKind::SupportViolation, "kl_divergence: q vanishes where p > 0");
        acc += p[j] * std::log(p[j] / q[j]);
    }
    return std::max(acc, 0.0);
}

double cross_entropy(std::span<const double> target, std::span<const double> q)
{
    require(target.size() == q.size(), ErrorKind::DimensionMismatch, "cross_entropy: length mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        if (target[j] != 0.0) {
            require(q[j] > 0.0, ErrorKind::SupportViolation, "cross_entropy: q vanishes on the target support");
            acc -= target[j] * std::log(q[j]);
        }
    }
    return acc;
}

std::vector<double> arithmetic_mean(std::span<const std::vector<double>> distributions)
{
    require(!distributions.empty(), ErrorKind::InvalidArgument, "mean of no distributions");
    std::vector<double> out(distributions.front().size(), 0.0);
    for (const auto& d : distributions) {
        require(d.size() == out.size(), ErrorKind::DimensionMismatch, "distributions differ in length");
        for (std::size_t j = 0; j < d.size(); ++j) {
            out[j] += d[j];
        }
    }
    for (double& v : out) {
        v /= static_cast<double>(distributions.size());
    }
    return out;
}

std::vector<double> geometric_mean(std::span<const std::vector<double>> distributions)
{
    require(!distributions.empty(), ErrorKind::InvalidArgument, "mean of no distributions");
    std::vector<double> out(distributions.front().size(), 0.0);
    for (const auto& d : distributions) {
        require(d.size() == out.size(), ErrorKind::DimensionMismatch, "distributions differ in length");
        for (std::size_t j = 0; j < d.size(); ++j) {
            out[j] += std::log(d[j]);
        }
    }
    double total = 0.0;
    for (double& v : out) {
        v = std::exp(v / static_cast<double>(distributions.size()));
        total += v;
    }
    require(total > 0.0, ErrorKind::SupportViolation, "geometric mean has empty support");
    for (double& v : out) {
        v /= total;
    }
    return out;
}

namespace {

VarianceEstimate variance_over(const std::vector<std::vector<double>>& predictions, std::span<const std::size_t> seeds)
{
    const std::size_t records = predictions.front().size();
    VarianceEstimate est;
    std::vector<std::vector<double>> dists(seeds.size(), std::vector<double>(2));
    for (std::size_t r = 0; r < records; ++r) {
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const double p = predictions[seeds[s]][r];
            dists[s] = {1.0 - p, p};
        }
        // Rounding in the barycenter would leave a ~1e-17 residue for an exact consensus.
        if (std::all_of(dists.begin(), dists.end(), [&](const auto& d) { return d == dists.front(); })) {
            continue;
        }
        const auto am = arithmetic_mean(dists);
        const auto gm = geometric_mean(dists);
        double a = 0.0;
        double g = 0.0;
        for (const auto& d : dists) {
            a += kl_divergence(am, d);
            g += kl_divergence(gm, d);
        }
        est.arithmetic += a / static_cast<double>(dists.size());
        est.geometric += g / static_cast<double>(dists.size());
    }
    est.arithmetic /= static_cast<double>(records);
    est.geometric /= static_cast<double>(records);
    return est;
}

void check_prediction_sets(const std::vector<std::vector<double>>& predictions)
{
    require(predictions.size() >= 2, ErrorKind::InsufficientSeeds, "ensemble variance needs at least two seeds");
    const std::size_t records = predictions.front().size();
    require(records > 0, ErrorKind::InvalidArgument, "ensemble variance needs at least one record");
    for (const auto& p : predictions) {
        require(p.size() == records, ErrorKind::DimensionMismatch, "prediction sets differ in length");
        for (double v : p) {
            require(v > 0.0 && v < 1.0, ErrorKind::InvalidArgument, "predictions must lie in (0, 1)");
        }
    }
}

} // namespace

VarianceEstimate ensemble_variance(const std::vector<std::vector<double>>& predictions)
{
    check_prediction_sets(predictions);
    std::vector<std::size_t> all(predictions.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    return variance_over(predictions, all);
}

EnsembleVarianceReport ensemble_variance_report(const std::vector<std::vector<double>>& multiBranch,
                                                const std::vector<std::vector<double>>& singleBranch,
                                                std::size_t resamples, std::uint64_t seed)
{
    check_prediction_sets(multiBranch);
    check_prediction_sets(singleBranch);
    require(multiBranch.size() == singleBranch.size() && multiBranch.front().size() == singleBranch.front().size(),
            ErrorKind::DimensionMismatch, "paired report needs matching seeds and records");
    EnsembleVarianceReport report;
    report.multiBranch = ensemble_variance(multiBranch);
    report.singleBranch = ensemble_variance(singleBranch);
    report.resamples = resamples;
    if (resamples == 0) {
        return report;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, multiBranch.size() - 1);
    std::vector<std::size_t> idx(multiBranch.size());
    std::size_t wins = 0;
    for (std::size_t b = 0; b < resamples; ++b) {
        for (auto& i : idx) {
            i = pick(rng);
        }
        wins += variance_over(multiBranch, idx).arithmetic <= variance_over(singleBranch, idx).arithmetic ? 1 : 0;
    }
    report.pairedWinRate = static_cast<double>(wins) / static_cast<double>(resamples);
    return report;
}

} // namespace muse::eval
