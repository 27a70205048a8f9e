// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace muse::eval {

struct ScoredLabel {
    double score = 0.0;
    int label = 0;
};

/// Mann-Whitney form: P(score_pos > score_neg) + 0.5 P(tie). Throws SingleClass.
double auroc(std::span<const ScoredLabel> items);

/// Average precision, ties ordered (score desc, positive first). Throws NoPositives.
double auprc(std::span<const ScoredLabel> items);

struct F1Recall {
    double f1 = 0.0;
    double recall = 0.0;
    double precision = 0.0;
};

/// Predicted positive when score >= threshold. 0/0 conventions give 0.
F1Recall f1_recall(std::span<const ScoredLabel> items, double threshold = 0.5);

struct ClassificationReport {
    double auroc = 0.0;
    double auprc = 0.0;
    double f1 = 0.0;
    double recall = 0.0;
};

/// All four metrics; AUROC/AUPRC are NaN when undefined (single class / no positives).
ClassificationReport classification_report(std::span<const ScoredLabel> items, double threshold = 0.5);

std::vector<ScoredLabel> zip_scores(std::span<const double> scores, std::span<const int> labels);

} // namespace muse::eval
