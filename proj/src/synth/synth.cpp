// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace muse::synth {

std::array<ArmaSpec, 3> baseline_specs()
{
    return {ArmaSpec{{-0.75, 0.25}, {0.65, 0.35}, 1.0}, ArmaSpec{{-0.8}, {0.5}, 1.0},
            ArmaSpec{{-0.65, 0.45, -0.2}, {0.70, 0.45, 0.25}, 1.0}};
}

std::array<ArmaSpec, 3> baseline_processes(ArConvention convention)
{
    auto specs = baseline_specs();
    if (convention == ArConvention::LagPolynomial) {
        for (auto& s : specs) {
            for (double& a : s.ar) {
                a = -a;
            }
        }
    }
    return specs;
}

bool is_stationary(const ArmaSpec& spec)
{
    // Characteristic polynomial 1 - phi_1 z - ... ; step down a_k = -phi_k.
    std::vector<double> a(spec.ar.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = spec.ar[i];
    }
    for (std::size_t p = a.size(); p > 0; --p) {
        const double k = a[p - 1];
        if (!(std::abs(k) < 1.0)) {
            return false;
        }
        const double denom = 1.0 - k * k;
        std::vector<double> next(p - 1);
        for (std::size_t i = 0; i + 1 < p; ++i) {
            next[i] = (a[i] + k * a[p - 2 - i]) / denom;
        }
        a = std::move(next);
    }
    return true;
}

std::vector<double> simulate_arma(const ArmaSpec& spec, std::size_t length, std::uint64_t seed)
{
    require(length >= 1, ErrorKind::InvalidArgument, "simulate_arma: length must be positive");
    require(spec.noiseStd > 0.0, ErrorKind::InvalidArgument, "simulate_arma: noiseStd must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, spec.noiseStd);
    const std::size_t total = length + kBurnIn;
    std::vector<double> v(total, 0.0);
    std::vector<double> e(total, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        e[t] = normal(rng);
        double x = e[t];
        for (std::size_t i = 0; i < spec.ar.size() && i < t; ++i) {
            x += spec.ar[i] * v[t - 1 - i];
        }
        for (std::size_t j = 0; j < spec.ma.size() && j < t; ++j) {
            x += spec.ma[j] * e[t - 1 - j];
        }
        v[t] = x;
    }
    return {v.begin() + static_cast<std::ptrdiff_t>(kBurnIn), v.end()};
}

std::array<std::vector<double>, kEngineeredVariables> engineer_features(std::span<const double> base1,
                                                                        std::span<const double> base2,
                                                                        std::span<const double> base3, int label)
{
    require(base1.size() == base2.size() && base1.size() == base3.size(), ErrorKind::LengthMismatch,
            "engineer_features: baseline series differ in length");
    require(label == 0 || label == 1, ErrorKind::InvalidArgument, "engineer_features: label must be 0 or 1");
    const std::size_t n = base1.size();
    const bool positive = label == 1;
    std::array<std::vector<double>, kEngineeredVariables> v;
    for (auto& col : v) {
        col.resize(n);
    }
    for (std::size_t t = 0; t < n; ++t) {
        const double a1 = base1[t];
        const double a2 = base2[t];
        const double a3 = base3[t];
        const double a4 = (positive ? 1.1 : 0.8) * a1;
        const double a5 = a1 + a2;
        const double a9 = positive ? 1.1 * a3 + 1.1 * a4 + a1 * a2 : a3 + a4 + a1 * a2;
        v[0][t] = a1;
        v[1][t] = a2;
        v[2][t] = a3;
        v[3][t] = a4;
        v[4][t] = a5;
        v[5][t] = a3 + a4;
        v[6][t] = a1 + a2 + a3;
        v[7][t] = a1 * a2 + a3 * a4;
        v[8][t] = a9;
        v[9][t] = -a5 + a9;
    }
    return v;
}

void DatasetConfig::validate() const
{
    auto check = [](bool ok, const std::string& field, const std::string& why) {
        require(ok, ErrorKind::ConfigInvalid, field + ": " + why);
    };
    check(nObs >= 1, "nObs", "must be at least 1");
    check(subTime >= 1 && subTime <= nObs, "subTime", "must lie in [1, nObs]");
    check(nVariables >= 1 && nVariables <= kEngineeredVariables, "nVariables", "must lie in [1, 10]");
    check(percentNegative >= 0.0 && percentNegative <= 1.0, "percentNegative", "must lie in [0, 1]");
    check(missingRateMin >= 0.0 && missingRateMin <= missingRateMax && missingRateMax <= 1.0, "missingRateRange",
          "need 0 <= min <= max <= 1");
}

std::vector<int> draw_labels(const DatasetConfig& config)
{
    const auto negatives =
        static_cast<std::size_t>(std::llround(config.percentNegative * static_cast<double>(config.nSamples)));
    std::vector<int> labels(config.nSamples, 1);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(negatives), 0);
    std::mt19937_64 rng(derive_seed(config.seed, 0xA5A5));
    std::shuffle(labels.begin(), labels.end(), rng);
    return labels;
}

LongitudinalRecord generate_record(const DatasetConfig& config, std::size_t index, int label)
{
    const std::uint64_t recordSeed = derive_seed(config.seed, index);
    const auto specs = baseline_processes(config.arConvention);
    std::array<std::vector<double>, 3> base;
    for (std::size_t b = 0; b < 3; ++b) {
        base[b] = simulate_arma(specs[b], config.nObs, derive_seed(recordSeed, b));
    }
    const auto features = engineer_features(base[0], base[1], base[2], label);

    std::mt19937_64 rng(derive_seed(recordSeed, 3));
    std::vector<std::size_t> grid(config.nObs);
    std::iota(grid.begin(), grid.end(), 0);
    std::vector<std::size_t> picked;
    picked.reserve(config.subTime);
    std::sample(grid.begin(), grid.end(), std::back_inserter(picked), config.subTime, rng);
    std::sort(picked.begin(), picked.end());

    const std::size_t t = config.subTime;
    const std::size_t m = config.nVariables;
    std::vector<double> times(t);
    Matrix values(t, m);
    for (std::size_t i = 0; i < t; ++i) {
        times[i] = static_cast<double>(picked[i] + 1);
        for (std::size_t v = 0; v < m; ++v) {
            values(i, v) = features[v][picked[i]];
        }
    }

    std::vector<std::uint8_t> observed(t * m, 1);
    std::uniform_real_distribution<double> rate(config.missingRateMin, config.missingRateMax);
    std::vector<std::size_t> rows(t);
    std::iota(rows.begin(), rows.end(), 0);
    for (std::size_t v = 0; v < m; ++v) {
        const auto hidden = static_cast<std::size_t>(std::llround(rate(rng) * static_cast<double>(t)));
        std::vector<std::size_t> cells;
        std::sample(rows.begin(), rows.end(), std::back_inserter(cells), hidden, rng);
        for (std::size_t r : cells) {
            observed[r * m + v] = 0;
        }
    }
    return {"s" + std::to_string(index), label, std::move(times), std::move(values), std::move(observed)};
}

SyntheticDataset generate_dataset(const DatasetConfig& config)
{
    config.validate();
    SyntheticDataset out;
    out.config = config;
    const auto specs = baseline_processes(config.arConvention);
    for (std::size_t b = 0; b < 3; ++b) {
        out.baselineStationary[b] = is_stationary(specs[b]);
    }
    const auto labels = draw_labels(config);
    out.records.reserve(config.nSamples);
    for (std::size_t i = 0; i < config.nSamples; ++i) {
        out.records.push_back(generate_record(config, i, labels[i]));
    }
    return out;
}

Split split_dataset(const Dataset& dataset, std::array<double, 3> fractions, std::uint64_t seed)
{
    double sum = 0.0;
    for (double f : fractions) {
        require(f >= 0.0, ErrorKind::FractionSumInvalid, "split fractions must be non-negative");
        sum += f;
    }
    require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::FractionSumInvalid,
            "split fractions sum to " + std::to_string(sum) + ", expected 1");

    std::vector<int> part(dataset.size(), 2);
    std::mt19937_64 rng(seed);
    for (int label : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (dataset[i].label() == label) {
                members.push_back(i);
            }
        }
        std::shuffle(members.begin(), members.end(), rng);
        const double n = static_cast<double>(members.size());
        const auto nTrain = static_cast<std::size_t>(std::llround(fractions[0] * n));
        const auto nVal = std::min(members.size() - nTrain, static_cast<std::size_t>(std::llround(fractions[1] * n)));
        for (std::size_t k = 0; k < members.size(); ++k) {
            part[members[k]] = k < nTrain ? 0 : (k < nTrain + nVal ? 1 : 2);
        }
    }
    Split out;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        (part[i] == 0 ? out.train : part[i] == 1 ? out.validation : out.test).push_back(dataset[i]);
    }
    return out;
}

} // namespace muse::synth
