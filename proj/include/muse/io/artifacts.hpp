// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/eval/bench.hpp"
#include "muse/eval/metrics.hpp"
#include "muse/io/config.hpp"
#include "muse/mgp/hyperparameters.hpp"
#include "muse/net/attention.hpp"
#include "muse/net/training.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace muse::io {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trip decimal form ("nan" / "inf" for non-finite values).
std::string format_double(double v);
double parse_double(std::string_view text);

// Hyperparameter file: {"B": [[...]], "sigma2": [...], "theta": x, "q": q, "M": M}
nlohmann::json hyperparameters_to_json(const mgp::MgpHyperparameters& hp);
mgp::MgpHyperparameters hyperparameters_from_json(const nlohmann::json& j);

// Checkpoint: JSON manifest + raw little-endian float64 blob next to it.
struct Checkpoint {
    net::EncoderConfig encoder;
    net::TrainConfig train;
    net::Standardizer standardizer;
    std::size_t epoch = 0;
    net::ParameterStore parameters;
    std::string configHash;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Writes `manifest` and a sibling "<stem>.bin".
void write_checkpoint(const std::filesystem::path& manifest, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& manifest);

// CSV tables. Every writer has a reader that restores an equal structure.
std::string trace_csv(const std::vector<net::EpochMetrics>& trace);
std::vector<net::EpochMetrics> parse_trace_csv(const std::string& text);

std::string report_csv(const eval::ClassificationReport& report);
eval::ClassificationReport parse_report_csv(const std::string& text);

/// Header layer,stream,row,col,value (mean maps).
std::string attention_csv(const net::AttentionSummary& summary);
/// Header layer,stream,class,col,value (per-class mean column sums).
std::string column_sums_csv(const net::AttentionSummary& summary);
/// Rebuilds layers, means and column sums; counts/heads are not stored in CSV.
net::AttentionSummary parse_attention_csv(const std::string& maps, const std::string& columnSums);

std::string bench_csv(const std::vector<eval::BenchRow>& rows);
std::vector<eval::BenchRow> parse_bench_csv(const std::string& text);

std::string predictions_csv(const std::vector<ImputedRecord>& records, const std::vector<double>& scores);

/// Manifest written next to every command's outputs.
nlohmann::json run_manifest(const std::string& command, const RunConfig& config,
                            const std::vector<std::string>& outputs);

nlohmann::json synth_metadata(const synth::SyntheticDataset& dataset, const RunConfig& config);

} // namespace muse::io
