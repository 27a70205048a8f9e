// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/net/attention.hpp"

#include "muse/error.hpp"

namespace muse::net {

namespace {

std::size_t common_length(std::span<const ImputedRecord> dataset)
{
    require(!dataset.empty(), ErrorKind::InvalidArgument, "attention export needs at least one record");
    const std::size_t t = dataset.front().times.size();
    for (const auto& r : dataset) {
        require(r.times.size() == t, ErrorKind::ShapeMismatch,
                "attention export needs equal-length records; " + r.id + " has " + std::to_string(r.times.size()) +
                    " steps, expected " + std::to_string(t));
    }
    return t;
}

bool wanted(const AttentionMap& map, std::optional<std::size_t> layer)
{
    return !layer || map.layer == *layer;
}

} // namespace

AttentionSummary export_attention(const MuseNet& net, std::span<const ImputedRecord> dataset,
                                  std::optional<std::size_t> layer)
{
    const std::size_t steps = common_length(dataset);
    AttentionSummary out;
    out.heads = net.config().nHeads;
    out.records = dataset.size();
    for (const auto& rec : dataset) {
        const auto maps = net.forward(rec).attention;
        std::size_t k = 0;
        for (const auto& map : maps) {
            if (!wanted(map, layer)) {
                continue;
            }
            if (out.layers.size() <= k) {
                LayerAttention la;
                la.layer = map.layer;
                la.stream = map.stream;
                la.mean = Matrix(steps, steps);
                la.classColumnSums = {std::vector<double>(steps, 0.0), std::vector<double>(steps, 0.0)};
                out.layers.push_back(std::move(la));
            }
            LayerAttention& la = out.layers[k++];
            la.mean += map.scores;
            auto& cols = la.classColumnSums[rec.label == 1 ? 1 : 0];
            for (std::size_t i = 0; i < steps; ++i) {
                for (std::size_t j = 0; j < steps; ++j) {
                    cols[j] += map.scores(i, j);
                }
            }
            ++la.classCounts[rec.label == 1 ? 1 : 0];
        }
    }
    for (auto& la : out.layers) {
        la.mean *= 1.0 / static_cast<double>(dataset.size());
        for (int c = 0; c < 2; ++c) {
            for (double& v : la.classColumnSums[c]) {
                v = la.classCounts[c] > 0 ? v / static_cast<double>(la.classCounts[c]) : 0.0;
            }
        }
    }
    return out;
}

AttentionSummary export_attention_batched(const MuseNet& net, std::span<const ImputedRecord> dataset,
                                          std::optional<std::size_t> layer)
{
    const std::size_t steps = common_length(dataset);
    std::vector<std::vector<AttentionMap>> all;
    all.reserve(dataset.size());
    for (const auto& rec : dataset) {
        auto maps = net.forward(rec).attention;
        std::erase_if(maps, [&](const AttentionMap& m) { return !wanted(m, layer); });
        all.push_back(std::move(maps));
    }

    AttentionSummary out;
    out.heads = net.config().nHeads;
    out.records = dataset.size();
    const std::size_t nRecords = dataset.size();
    for (std::size_t k = 0; k < all.front().size(); ++k) {
        LayerAttention la;
        la.layer = all.front()[k].layer;
        la.stream = all.front()[k].stream;
        // Stack: row r holds record r's map flattened; weights rows select / average.
        Matrix stack(nRecords, steps * steps);
        Matrix weights(3, nRecords);
        for (std::size_t r = 0; r < nRecords; ++r) {
            const auto& s = all[r][k].scores.values();
            std::copy(s.begin(), s.end(), stack.row(r).begin());
            const int c = dataset[r].label == 1 ? 1 : 0;
            weights(0, r) = 1.0 / static_cast<double>(nRecords);
            weights(1 + c, r) = 1.0;
            ++la.classCounts[c];
        }
        for (int c = 0; c < 2; ++c) {
            if (la.classCounts[c] > 0) {
                for (std::size_t r = 0; r < nRecords; ++r) {
                    weights(1 + c, r) /= static_cast<double>(la.classCounts[c]);
                }
            }
        }
        const Matrix reduced = matmul(weights, stack);
        la.mean = Matrix(steps, steps, std::vector<double>(reduced.row(0).begin(), reduced.row(0).end()));
        const Matrix ones(1, steps, 1.0);
        for (int c = 0; c < 2; ++c) {
            const Matrix classMean(steps, steps,
                                   std::vector<double>(reduced.row(1 + c).begin(), reduced.row(1 + c).end()));
            const Matrix sums = matmul(ones, classMean);
            la.classColumnSums[c].assign(sums.values().begin(), sums.values().end());
        }
        out.layers.push_back(std::move(la));
    }
    return out;
}

} // namespace muse::net
