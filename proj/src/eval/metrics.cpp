// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/eval/metrics.hpp"

#include "muse/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace muse::eval {
namespace {

void check_items(std::span<const ScoredLabel> items)
{
    for (const auto& it : items) {
        require(std::isfinite(it.score), ErrorKind::InvalidArgument, "metric: non-finite score");
        require(it.label == 0 || it.label == 1, ErrorKind::InvalidArgument, "metric: label must be 0 or 1");
    }
}

} // namespace

std::vector<ScoredLabel> zip_scores(std::span<const double> scores, std::span<const int> labels)
{
    require(scores.size() == labels.size(), ErrorKind::DimensionMismatch, "zip_scores: length mismatch");
    std::vector<ScoredLabel> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = {scores[i], labels[i]};
    }
    return out;
}

double auroc(std::span<const ScoredLabel> items)
{
    check_items(items);
    std::vector<ScoredLabel> sorted(items.begin(), items.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
    // Twice the Mann-Whitney count, kept integral so the ratio is exact.
    std::uint64_t twiceWins = 0;
    std::uint64_t negBelow = 0;
    std::uint64_t positives = 0;
    std::uint64_t negatives = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        std::uint64_t pos = 0;
        std::uint64_t neg = 0;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) {
            (sorted[j].label == 1 ? pos : neg) += 1;
            ++j;
        }
        twiceWins += 2 * pos * negBelow + pos * neg;
        negBelow += neg;
        positives += pos;
        negatives += neg;
        i = j;
    }
    require(positives > 0 && negatives > 0, ErrorKind::SingleClass, "auroc needs both classes");
    return static_cast<double>(twiceWins) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double auprc(std::span<const ScoredLabel> items)
{
    check_items(items);
    std::vector<ScoredLabel> sorted(items.begin(), items.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.score != b.score ? a.score > b.score : a.label > b.label;
    });
    std::size_t positives = 0;
    for (const auto& it : sorted) {
        positives += static_cast<std::size_t>(it.label);
    }
    require(positives > 0, ErrorKind::NoPositives, "auprc needs at least one positive");
    double sum = 0.0;
    std::size_t tp = 0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (sorted[k].label == 1) {
            ++tp;
            sum += static_cast<double>(tp) / static_cast<double>(k + 1);
        }
    }
    return sum / static_cast<double>(positives);
}

F1Recall f1_recall(std::span<const ScoredLabel> items, double threshold)
{
    check_items(items);
    require(threshold > 0.0 && threshold < 1.0, ErrorKind::InvalidArgument, "f1_recall: threshold must be in (0,1)");
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (const auto& it : items) {
        const bool predicted = it.score >= threshold;
        if (predicted && it.label == 1) {
            ++tp;
        } else if (predicted) {
            ++fp;
        } else if (it.label == 1) {
            ++fn;
        }
    }
    F1Recall out;
    out.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    out.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    // 2PR/(P+R) rewritten over counts: one rounding instead of four.
    out.f1 = tp == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
    return out;
}

ClassificationReport classification_report(std::span<const ScoredLabel> items, double threshold)
{
    ClassificationReport r;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    bool hasPos = false;
    bool hasNeg = false;
    for (const auto& it : items) {
        (it.label == 1 ? hasPos : hasNeg) = true;
    }
    r.auroc = hasPos && hasNeg ? auroc(items) : nan;
    r.auprc = hasPos ? auprc(items) : nan;
    const auto f = f1_recall(items, threshold);
    r.f1 = f.f1;
    r.recall = f.recall;
    return r;
}

} // namespace muse::eval
