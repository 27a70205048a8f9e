// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/net/layers.hpp"
#include "muse/record.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace muse::net {

inline constexpr double kProbabilityClamp = 1e-7;

struct EncoderConfig {
    std::size_t nVariables = 10; // model width
    std::size_t nHeads = 2;
    std::size_t nBlocks = 2;
    std::size_t feedForwardWidth = 24;
    std::size_t nBranches = 10;
    double dropout = 0.0;
    std::uint64_t seed = 0;
    /// False drops the mask stream; the branch heads then see M pooled features.
    bool useMaskStream = true;
    /// Encode times relative to the first step instead of as given.
    bool reZeroTimes = false;

    void validate() const;

    friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct TensorSlot {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;

    friend bool operator==(const TensorSlot&, const TensorSlot&) = default;
};

/// Flat parameter vector with named tensor views, in declaration order.
class ParameterStore {
public:
    std::size_t add(std::string name, std::size_t rows, std::size_t cols);

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<TensorSlot>& slots() const noexcept { return slots_; }

    [[nodiscard]] std::span<double> view(std::size_t slot) noexcept;
    [[nodiscard]] std::span<const double> view(std::size_t slot) const noexcept;
    [[nodiscard]] Matrix tensor(std::size_t slot) const;
    [[nodiscard]] std::size_t find(std::string_view name) const;

    friend bool operator==(const ParameterStore&, const ParameterStore&) = default;

private:
    std::vector<double> values_;
    std::vector<TensorSlot> slots_;
};

enum class Stream { Values, Masks };

std::string_view to_string(Stream stream) noexcept;

/// Aggregated score S of one block for one record (rows sum to h).
struct AttentionMap {
    std::size_t layer = 0;
    Stream stream = Stream::Values;
    Matrix scores;
};

struct ForwardResult {
    std::vector<double> logits;
    std::vector<double> probabilities;
    std::vector<AttentionMap> attention;
};

struct GraphOutputs {
    std::vector<Var> logits;
    std::vector<AttentionMap> attention;
};

std::size_t parameter_count(const EncoderConfig& config);

class MuseNet {
public:
    /// Glorot-uniform weights, unit gains, zero biases, all from config.seed.
    explicit MuseNet(EncoderConfig config);
    MuseNet(EncoderConfig config, ParameterStore parameters);

    [[nodiscard]] const EncoderConfig& config() const noexcept { return config_; }
    [[nodiscard]] ParameterStore& parameters() noexcept { return params_; }
    [[nodiscard]] const ParameterStore& parameters() const noexcept { return params_; }

    /// `validSteps` = 0 means every step is real; otherwise trailing steps are padding.
    [[nodiscard]] ForwardResult forward(const ImputedRecord& record, std::size_t validSteps = 0) const;

    /// Records the forward pass on `tape`; parameter gradients land in `grad`
    /// (size() entries) when the tape runs backward. `dropoutSeed` only matters
    /// when the configured rate is positive.
    GraphOutputs record(Tape& tape, const ImputedRecord& record, std::span<double> grad, std::size_t validSteps = 0,
                        std::uint64_t dropoutSeed = 0) const;

    friend bool operator==(const MuseNet&, const MuseNet&) = default;

private:
    struct BlockSlots {
        std::vector<std::size_t> query;
        std::vector<std::size_t> key;
        std::size_t value = 0;
        std::size_t output = 0;
        std::size_t gain1 = 0;
        std::size_t bias1 = 0;
        std::size_t w1 = 0;
        std::size_t b1 = 0;
        std::size_t w2 = 0;
        std::size_t b2 = 0;
        std::size_t gain2 = 0;
        std::size_t bias2 = 0;

        friend bool operator==(const BlockSlots&, const BlockSlots&) = default;
    };

    void declare();

    EncoderConfig config_;
    ParameterStore params_;
    std::vector<std::vector<BlockSlots>> streams_;
    std::vector<std::size_t> branchWeights_;
    std::vector<std::size_t> branchBiases_;
};

/// Gated loss of one record: sum of clamped BCE terms over the branches listed.
/// Adds d(loss)/d(params) into `grad` and returns the loss.
double record_loss_and_gradient(const MuseNet& net, const ImputedRecord& record,
                                std::span<const std::size_t> branches, std::span<double> grad,
                                std::size_t validSteps = 0, std::uint64_t dropoutSeed = 0);

} // namespace muse::net
