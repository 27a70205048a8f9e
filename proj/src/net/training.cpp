// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/net/training.hpp"

#include "muse/error.hpp"
#include "muse/eval/metrics.hpp"
#include "muse/parallel.hpp"
#include "muse/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace muse::net {

std::vector<std::vector<std::size_t>> BranchAssignment::membership(std::size_t records) const
{
    std::vector<std::vector<std::size_t>> out(records);
    for (std::size_t b = 0; b < branches.size(); ++b) {
        for (std::size_t r : branches[b]) {
            require(r < records, ErrorKind::InvalidArgument, "branch refers to a record outside the dataset");
            out[r].push_back(b);
        }
    }
    return out;
}

BranchAssignment multi_branch_partition(std::span<const int> labels, std::size_t nBranches, std::uint64_t seed)
{
    require(nBranches >= 1, ErrorKind::ConfigInvalid, "nBranches must be >= 1");
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == 1 ? pos : neg).push_back(i);
    }
    require(!pos.empty() && !neg.empty(), ErrorKind::EmptyClass,
            "multi-branch partition needs both classes (positives " + std::to_string(pos.size()) + ", negatives " +
                std::to_string(neg.size()) + ")");
    // Ties make the positives the minority.
    const bool positiveMinority = pos.size() <= neg.size();
    const auto& minority = positiveMinority ? pos : neg;
    std::vector<std::size_t> majority = positiveMinority ? neg : pos;
    std::mt19937_64 rng(seed);
    std::shuffle(majority.begin(), majority.end(), rng);

    BranchAssignment out;
    out.minorityLabel = positiveMinority ? 1 : 0;
    out.branches.resize(nBranches);
    const std::size_t base = majority.size() / nBranches;
    const std::size_t extra = majority.size() % nBranches;
    std::size_t next = 0;
    for (std::size_t b = 0; b < nBranches; ++b) {
        const std::size_t shard = base + (b < extra ? 1 : 0);
        auto& br = out.branches[b];
        br = minority;
        br.insert(br.end(), majority.begin() + static_cast<std::ptrdiff_t>(next),
                  majority.begin() + static_cast<std::ptrdiff_t>(next + shard));
        next += shard;
        std::sort(br.begin(), br.end());
    }
    return out;
}

BranchAssignment multi_branch_partition(std::span<const ImputedRecord> dataset, std::size_t nBranches,
                                        std::uint64_t seed)
{
    std::vector<int> labels;
    labels.reserve(dataset.size());
    for (const auto& r : dataset) {
        labels.push_back(r.label);
    }
    return multi_branch_partition(labels, nBranches, seed);
}

double mb_loss(const std::vector<std::vector<double>>& probabilities, std::span<const int> labels,
               const BranchAssignment& assignment)
{
    require(probabilities.size() == labels.size(), ErrorKind::LengthMismatch, "one probability row per label");
    double loss = 0.0;
    for (std::size_t b = 0; b < assignment.branches.size(); ++b) {
        for (std::size_t r : assignment.branches[b]) {
            require(r < labels.size() && b < probabilities[r].size(), ErrorKind::ShapeMismatch,
                    "assignment does not fit the prediction table");
            const double p = std::clamp(probabilities[r][b], kProbabilityClamp, 1.0 - kProbabilityClamp);
            loss -= labels[r] == 1 ? std::log(p) : std::log(1.0 - p);
        }
    }
    return loss;
}

double predict(std::span<const double> branchProbabilities)
{
    require(!branchProbabilities.empty(), ErrorKind::InvalidArgument, "predict needs at least one branch");
    return std::accumulate(branchProbabilities.begin(), branchProbabilities.end(), 0.0) /
           static_cast<double>(branchProbabilities.size());
}

void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& config)
{
    state.step(params, grads, config);
}

void TrainConfig::validate() const
{
    require(batchSize >= 1, ErrorKind::ConfigInvalid, "batchSize must be >= 1");
    require(adam.learningRate > 0.0, ErrorKind::ConfigInvalid, "learningRate must be positive");
    require(adam.weightDecay >= 0.0, ErrorKind::ConfigInvalid, "weightDecay must be non-negative");
    require(lrDecay > 0.0, ErrorKind::ConfigInvalid, "lrDecay must be positive");
}

std::vector<double> predict_dataset(const MuseNet& net, std::span<const ImputedRecord> dataset)
{
    std::vector<double> out;
    out.reserve(dataset.size());
    for (const auto& r : dataset) {
        out.push_back(predict(net.forward(r).probabilities));
    }
    return out;
}

namespace {

EpochMetrics validation_metrics(const MuseNet& net, std::span<const ImputedRecord> validation)
{
    EpochMetrics m;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    m.auroc = m.auprc = m.f1 = m.recall = nan;
    if (validation.empty()) {
        return m;
    }
    const auto scores = predict_dataset(net, validation);
    std::vector<int> labels;
    for (const auto& r : validation) {
        labels.push_back(r.label);
    }
    const auto report = eval::classification_report(eval::zip_scores(scores, labels));
    m.auroc = report.auroc;
    m.auprc = report.auprc;
    m.f1 = report.f1;
    m.recall = report.recall;
    return m;
}

} // namespace

TrainResult train(const MuseNet& initial, std::span<const ImputedRecord> training,
                  std::span<const ImputedRecord> validation, const TrainConfig& config)
{
    config.validate();
    TrainResult result{initial, {}, {}};
    if (config.epochs == 0) {
        return result;
    }
    require(!training.empty(), ErrorKind::InvalidArgument, "training set is empty");
    MuseNet& net = result.model;
    result.assignment = multi_branch_partition(training, net.config().nBranches, derive_seed(config.seed, 1));
    const auto membership = result.assignment.membership(training.size());

    const std::size_t n = net.parameters().size();
    AdamState state(n);
    std::vector<std::size_t> order(training.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        AdamConfig adam = config.adam;
        if (config.lrStepEpochs > 0) {
            adam.learningRate *= std::pow(config.lrDecay, static_cast<double>(epoch / config.lrStepEpochs));
        }
        std::mt19937_64 rng(derive_seed(config.seed, 1000 + epoch));
        std::shuffle(order.begin(), order.end(), rng);
        const std::uint64_t dropoutBase = derive_seed(config.seed, 2000000 + epoch);

        double epochLoss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batchSize) {
            const std::size_t count = std::min(config.batchSize, order.size() - start);
            std::vector<std::vector<double>> grads(count, std::vector<double>(n, 0.0));
            std::vector<double> losses(count, 0.0);
            try {
                parallel_for(
                    count, config.jobs,
                    [&](std::size_t k) {
                        const std::size_t r = order[start + k];
                        losses[k] = record_loss_and_gradient(net, training[r], membership[r], grads[k], 0,
                                                             derive_seed(dropoutBase, start + k));
                    },
                    [&](std::size_t k) { return "record " + training[order[start + k]].id; });
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NonFinite) {
                    throw;
                }
                throw Error(ErrorKind::NonFiniteLoss, "forward pass went non-finite at epoch " +
                                                          std::to_string(epoch) + ": " + e.what());
            }

            // Fixed summation order keeps the result independent of `jobs`.
            std::vector<double> total(n, 0.0);
            double batchLoss = 0.0;
            for (std::size_t k = 0; k < count; ++k) {
                if (!std::isfinite(losses[k])) {
                    throw Error(ErrorKind::NonFiniteLoss, "loss is " + std::to_string(losses[k]) + " at epoch " +
                                                              std::to_string(epoch) + ", record " +
                                                              training[order[start + k]].id);
                }
                batchLoss += losses[k];
                for (std::size_t i = 0; i < n; ++i) {
                    total[i] += grads[k][i];
                }
            }
            const double inv = 1.0 / static_cast<double>(count);
            for (double& g : total) {
                g *= inv;
            }
            adamw_step(net.parameters().values(), total, state, adam);
            const auto p = net.parameters().values();
            if (!std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); })) {
                throw Error(ErrorKind::NonFiniteLoss,
                            "parameters became non-finite at epoch " + std::to_string(epoch));
            }
            epochLoss += batchLoss;
        }

        EpochMetrics m = validation_metrics(net, validation);
        m.epoch = epoch + 1;
        m.trainLoss = epochLoss / static_cast<double>(training.size());
        m.learningRate = adam.learningRate;
        result.trace.push_back(m);
    }
    return result;
}

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale))
{
    require(mean_.size() == scale_.size(), ErrorKind::LengthMismatch, "standardizer mean/scale lengths differ");
    for (double s : scale_) {
        require(s > 0.0 && std::isfinite(s), ErrorKind::InvalidArgument, "standardizer scale must be positive");
    }
}

Standardizer Standardizer::fit(std::span<const ImputedRecord> training)
{
    require(!training.empty(), ErrorKind::InvalidArgument, "cannot fit a standardizer on no records");
    const std::size_t m = training.front().imputed.cols();
    std::vector<double> sum(m, 0.0);
    std::vector<double> sq(m, 0.0);
    std::vector<double> count(m, 0.0);
    for (const auto& r : training) {
        require(r.imputed.cols() == m, ErrorKind::ShapeMismatch, "records disagree on the variable count");
        for (std::size_t t = 0; t < r.imputed.rows(); ++t) {
            for (std::size_t j = 0; j < m; ++j) {
                if (r.mask(t, j) == 0.0) {
                    sum[j] += r.imputed(t, j);
                    sq[j] += r.imputed(t, j) * r.imputed(t, j);
                    count[j] += 1.0;
                }
            }
        }
    }
    std::vector<double> mean(m, 0.0);
    std::vector<double> scale(m, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        if (count[j] > 0.0) {
            mean[j] = sum[j] / count[j];
            const double var = sq[j] / count[j] - mean[j] * mean[j];
            // A constant variable is only centred.
            scale[j] = var > 1e-12 ? std::sqrt(var) : 1.0;
        }
    }
    return Standardizer(std::move(mean), std::move(scale));
}

ImputedRecord Standardizer::apply(const ImputedRecord& record) const
{
    require(record.imputed.cols() == mean_.size(), ErrorKind::ShapeMismatch,
            "record " + record.id + " has a different variable count than the standardizer");
    ImputedRecord out = record;
    for (std::size_t t = 0; t < out.imputed.rows(); ++t) {
        for (std::size_t j = 0; j < out.imputed.cols(); ++j) {
            out.imputed(t, j) = (out.imputed(t, j) - mean_[j]) / scale_[j];
        }
    }
    return out;
}

std::vector<ImputedRecord> Standardizer::apply(std::span<const ImputedRecord> records) const
{
    std::vector<ImputedRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(apply(r));
    }
    return out;
}

} // namespace muse::net
