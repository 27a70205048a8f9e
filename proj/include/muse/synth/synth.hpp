// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/random.hpp"
#include "muse/record.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace muse::synth {

struct ArmaSpec {
    std::vector<double> ar;   // phi_1..phi_p
    std::vector<double> ma;   // psi_1..psi_q
    double noiseStd = 1.0;
};

/// How the AR entries of a coefficient table map onto the recursion.
enum class ArConvention {
    /// Entries are lag-polynomial coefficients, 1 + a_1 L + ... (phi_i = -a_i),
    /// as in common ARMA toolkits. All three baselines are stationary.
    LagPolynomial,
    /// Entries are the recursion's phi_i directly. Baseline 1 then has a unit
    /// root and baseline 3 is explosive.
    Recursion,
};

/// The three baseline coefficient sets exactly as tabulated ({AR..., MA...}),
/// read in the recursion convention.
std::array<ArmaSpec, 3> baseline_specs();

/// The baselines mapped to recursion coefficients under `convention`.
std::array<ArmaSpec, 3> baseline_processes(ArConvention convention);

/// AR part stationarity via the Levinson step-down: all reflection
/// coefficients strictly inside (-1, 1).
bool is_stationary(const ArmaSpec& spec);

inline constexpr std::size_t kBurnIn = 200;

/// v_t = sum phi_i v_{t-i} + sum psi_j e_{t-j} + e_t, zero pre-sample lags,
/// Gaussian innovations, first kBurnIn steps discarded.
std::vector<double> simulate_arma(const ArmaSpec& spec, std::size_t length, std::uint64_t seed);

inline constexpr std::size_t kEngineeredVariables = 10;

/// Ten class-dependent variables derived from three baseline series.
std::array<std::vector<double>, kEngineeredVariables> engineer_features(std::span<const double> base1,
                                                                        std::span<const double> base2,
                                                                        std::span<const double> base3, int label);

struct DatasetConfig {
    std::size_t nObs = 200;
    std::size_t subTime = 50;
    std::size_t nVariables = 10;
    std::size_t nSamples = 5000;
    double percentNegative = 0.90;
    double missingRateMin = 0.30;
    double missingRateMax = 0.60;
    std::uint64_t seed = 0;
    ArConvention arConvention = ArConvention::LagPolynomial;

    /// Throws ConfigInvalid naming the offending field.
    void validate() const;

    friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct SyntheticDataset {
    Dataset records;
    DatasetConfig config;
    /// Stationarity of each baseline process actually simulated.
    std::array<bool, 3> baselineStationary{};
};

/// Deterministic per seed; each record draws from its own derived stream so
/// the output does not depend on generation order.
SyntheticDataset generate_dataset(const DatasetConfig& config);

/// Generates one record; exposed so callers can regenerate a single index.
LongitudinalRecord generate_record(const DatasetConfig& config, std::size_t index, int label);

/// Exact-count label list (round(n * percentNegative) zeros), shuffled per seed.
std::vector<int> draw_labels(const DatasetConfig& config);

struct Split {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Stratified by label, original order kept within each part. Throws
/// FractionSumInvalid unless the three fractions are non-negative and sum to 1.
Split split_dataset(const Dataset& dataset, std::array<double, 3> fractions, std::uint64_t seed);

using muse::derive_seed;

} // namespace muse::synth
