// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/net/model.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace muse::net {

/// Aggregates of one (stream, block) over a dataset.
struct LayerAttention {
    std::size_t layer = 0;
    Stream stream = Stream::Values;
    /// Mean of S over all records.
    Matrix mean;
    /// Per class (index = label): mean over that class of the column sums of S.
    std::array<std::vector<double>, 2> classColumnSums;
    std::array<std::size_t, 2> classCounts{0, 0};
};

struct AttentionSummary {
    std::size_t heads = 0;
    std::size_t records = 0;
    std::vector<LayerAttention> layers;
};

/// One forward pass per record, accumulated as it goes. All records must share
/// a length. `layer` restricts the output to one block index.
AttentionSummary export_attention(const MuseNet& net, std::span<const ImputedRecord> dataset,
                                  std::optional<std::size_t> layer = std::nullopt);

/// Same aggregates from the full stack of per-record maps (reduced with matrix
/// products); kept as an independent path for cross-checking.
AttentionSummary export_attention_batched(const MuseNet& net, std::span<const ImputedRecord> dataset,
                                          std::optional<std::size_t> layer = std::nullopt);

} // namespace muse::net
