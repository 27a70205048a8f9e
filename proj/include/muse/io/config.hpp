// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/eval/bench.hpp"
#include "muse/net/training.hpp"
#include "muse/pipeline.hpp"
#include "muse/synth/synth.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace muse::io {

/// Everything a run needs. Component seeds are derived from `seed`, so one
/// number pins every random choice.
struct RunConfig {
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    synth::DatasetConfig data;
    std::array<double, 3> split{0.8, 0.1, 0.1};
    pipeline::ImputeConfig impute;
    net::EncoderConfig encoder;
    net::TrainConfig train;
    double threshold = 0.5;
    std::optional<std::size_t> attentionLayer;
    std::vector<std::size_t> benchSizes{100, 200, 400};
    eval::BenchOptions bench;

    /// Copies `seed` / `jobs` into the component configs.
    void propagate();
    void validate() const;
};

/// Stable seed offsets per component.
enum class SeedStream : std::uint64_t { Split = 1, Impute = 2, Encoder = 3, Train = 4, Bench = 5 };

std::uint64_t component_seed(std::uint64_t seed, SeedStream stream) noexcept;

nlohmann::json to_json(const RunConfig& config);

/// Overlays `document` on the defaults. Unknown keys and wrong types raise
/// ConfigInvalid naming the field ("train.epochs").
RunConfig config_from_json(const nlohmann::json& document);

RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical JSON of the resolved config, as 16 hex digits.
std::string config_hash(const RunConfig& config);
std::string fnv1a_hex(std::string_view bytes);

} // namespace muse::io
