// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/net/model.hpp"
#include "muse/optim.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace muse::net {

/// Branch i holds every minority record plus majority shard i (indices into the dataset).
struct BranchAssignment {
    std::vector<std::vector<std::size_t>> branches;
    int minorityLabel = 1;

    /// For each record, the branches that contain it (ascending).
    [[nodiscard]] std::vector<std::vector<std::size_t>> membership(std::size_t records) const;

    friend bool operator==(const BranchAssignment&, const BranchAssignment&) = default;
};

BranchAssignment multi_branch_partition(std::span<const int> labels, std::size_t nBranches, std::uint64_t seed);
BranchAssignment multi_branch_partition(std::span<const ImputedRecord> dataset, std::size_t nBranches,
                                        std::uint64_t seed);

/// probabilities[record][branch]; the sum of gated, clamped BCE terms.
double mb_loss(const std::vector<std::vector<double>>& probabilities, std::span<const int> labels,
               const BranchAssignment& assignment);

/// Mean of the branch probabilities.
double predict(std::span<const double> branchProbabilities);

/// p <- p - lr * weightDecay * p, then the bias-corrected Adam delta.
void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& config);

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batchSize = 32;
    AdamConfig adam{5e-3, 0.9, 0.999, 1e-8, 1e-2};
    /// Step decay: lr is multiplied by lrDecay every lrStepEpochs epochs (0 disables).
    std::size_t lrStepEpochs = 0;
    double lrDecay = 1.0;
    std::uint64_t seed = 0;
    /// Batch-internal workers; results do not depend on it.
    std::size_t jobs = 1;

    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double trainLoss = 0.0;
    double learningRate = 0.0;
    double auroc = 0.0;
    double auprc = 0.0;
    double f1 = 0.0;
    double recall = 0.0;
};

struct TrainResult {
    MuseNet model;
    std::vector<EpochMetrics> trace;
    BranchAssignment assignment;
};

/// Trains from `initial` (whose config is used). Validation metrics are NaN
/// when the validation set is empty or single-class.
TrainResult train(const MuseNet& initial, std::span<const ImputedRecord> training,
                  std::span<const ImputedRecord> validation, const TrainConfig& config);

/// Ensemble probability of every record.
std::vector<double> predict_dataset(const MuseNet& net, std::span<const ImputedRecord> dataset);

/// Per-variable z-scoring with statistics from the observed cells of a training set.
class Standardizer {
public:
    Standardizer() = default;
    Standardizer(std::vector<double> mean, std::vector<double> scale);

    static Standardizer fit(std::span<const ImputedRecord> training);

    [[nodiscard]] const std::vector<double>& mean() const noexcept { return mean_; }
    [[nodiscard]] const std::vector<double>& scale() const noexcept { return scale_; }

    [[nodiscard]] ImputedRecord apply(const ImputedRecord& record) const;
    [[nodiscard]] std::vector<ImputedRecord> apply(std::span<const ImputedRecord> records) const;

    friend bool operator==(const Standardizer&, const Standardizer&) = default;

private:
    std::vector<double> mean_;
    std::vector<double> scale_;
};

} // namespace muse::net
