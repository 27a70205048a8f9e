// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/net/model.hpp"

#include "muse/error.hpp"

#include <cmath>
#include <random>

namespace muse::net {

void EncoderConfig::validate() const
{
    require(nVariables >= 1, ErrorKind::ConfigInvalid, "nVariables must be >= 1");
    require(nHeads >= 1, ErrorKind::ConfigInvalid, "nHeads must be >= 1");
    require(nVariables % nHeads == 0, ErrorKind::HeadsDontDivideWidth,
            std::to_string(nHeads) + " heads do not divide width " + std::to_string(nVariables));
    require(nBlocks >= 1, ErrorKind::ConfigInvalid, "nBlocks must be >= 1");
    require(feedForwardWidth >= 1, ErrorKind::ConfigInvalid, "feedForwardWidth must be >= 1");
    require(nBranches >= 1, ErrorKind::ConfigInvalid, "nBranches must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, ErrorKind::ConfigInvalid, "dropout must lie in [0, 1)");
}

std::size_t ParameterStore::add(std::string name, std::size_t rows, std::size_t cols)
{
    slots_.push_back({std::move(name), rows, cols, values_.size()});
    values_.resize(values_.size() + rows * cols, 0.0);
    return slots_.size() - 1;
}

std::span<double> ParameterStore::view(std::size_t slot) noexcept
{
    const auto& s = slots_[slot];
    return {values_.data() + s.offset, s.rows * s.cols};
}

std::span<const double> ParameterStore::view(std::size_t slot) const noexcept
{
    const auto& s = slots_[slot];
    return {values_.data() + s.offset, s.rows * s.cols};
}

Matrix ParameterStore::tensor(std::size_t slot) const
{
    const auto v = view(slot);
    return Matrix(slots_[slot].rows, slots_[slot].cols, std::vector<double>(v.begin(), v.end()));
}

std::size_t ParameterStore::find(std::string_view name) const
{
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (slots_[i].name == name) {
            return i;
        }
    }
    throw Error(ErrorKind::InvalidArgument, "no parameter named " + std::string(name));
}

std::string_view to_string(Stream stream) noexcept
{
    return stream == Stream::Values ? "values" : "masks";
}

MuseNet::MuseNet(EncoderConfig config) : config_(config)
{
    config_.validate();
    declare();
    std::mt19937_64 rng(config_.seed);
    for (const auto& slot : params_.slots()) {
        const bool isGain = slot.name.ends_with(".gain1") || slot.name.ends_with(".gain2");
        const bool isBias = slot.rows == 1 && !isGain;
        auto v = params_.view(static_cast<std::size_t>(&slot - params_.slots().data()));
        if (isGain) {
            std::fill(v.begin(), v.end(), 1.0);
        } else if (!isBias) {
            const double limit = std::sqrt(6.0 / static_cast<double>(slot.rows + slot.cols));
            std::uniform_real_distribution<double> u(-limit, limit);
            for (double& x : v) {
                x = u(rng);
            }
        }
    }
}

MuseNet::MuseNet(EncoderConfig config, ParameterStore parameters) : config_(config)
{
    config_.validate();
    declare();
    require(parameters.slots() == params_.slots(), ErrorKind::ShapeMismatch,
            "parameter layout does not match the encoder config");
    params_ = std::move(parameters);
}

void MuseNet::declare()
{
    const std::size_t m = config_.nVariables;
    const std::size_t dh = m / config_.nHeads;
    const std::size_t nStreams = config_.useMaskStream ? 2 : 1;
    streams_.assign(nStreams, {});
    for (std::size_t s = 0; s < nStreams; ++s) {
        const std::string stream(to_string(s == 0 ? Stream::Values : Stream::Masks));
        for (std::size_t b = 0; b < config_.nBlocks; ++b) {
            const std::string p = stream + ".block" + std::to_string(b) + ".";
            BlockSlots slots;
            for (std::size_t l = 0; l < config_.nHeads; ++l) {
                slots.query.push_back(params_.add(p + "head" + std::to_string(l) + ".query", m, dh));
                slots.key.push_back(params_.add(p + "head" + std::to_string(l) + ".key", m, dh));
            }
            slots.value = params_.add(p + "value", m, m);
            slots.output = params_.add(p + "output", m, m);
            slots.gain1 = params_.add(p + "gain1", 1, m);
            slots.bias1 = params_.add(p + "bias1", 1, m);
            slots.w1 = params_.add(p + "ff.w1", m, config_.feedForwardWidth);
            slots.b1 = params_.add(p + "ff.b1", 1, config_.feedForwardWidth);
            slots.w2 = params_.add(p + "ff.w2", config_.feedForwardWidth, m);
            slots.b2 = params_.add(p + "ff.b2", 1, m);
            slots.gain2 = params_.add(p + "gain2", 1, m);
            slots.bias2 = params_.add(p + "bias2", 1, m);
            streams_[s].push_back(std::move(slots));
        }
    }
    for (std::size_t i = 0; i < config_.nBranches; ++i) {
        branchWeights_.push_back(params_.add("branch" + std::to_string(i) + ".weight", nStreams * m, 1));
        branchBiases_.push_back(params_.add("branch" + std::to_string(i) + ".bias", 1, 1));
    }
}

std::size_t parameter_count(const EncoderConfig& config)
{
    config.validate();
    const std::size_t m = config.nVariables;
    const std::size_t f = config.feedForwardWidth;
    const std::size_t block = 2 * m * m + 2 * m * m + 4 * m + (m * f + f + f * m + m);
    const std::size_t streams = config.useMaskStream ? 2 : 1;
    return streams * config.nBlocks * block + config.nBranches * (streams * m + 1);
}

GraphOutputs MuseNet::record(Tape& tape, const ImputedRecord& rec, std::span<double> grad, std::size_t validSteps,
                             std::uint64_t dropoutSeed) const
{
    const std::size_t m = config_.nVariables;
    const std::size_t steps = rec.times.size();
    require(steps >= 1, ErrorKind::ShapeMismatch, "record " + rec.id + " has no time steps");
    require(rec.imputed.rows() == steps && rec.imputed.cols() == m && rec.mask.rows() == steps &&
                rec.mask.cols() == m,
            ErrorKind::ShapeMismatch,
            "record " + rec.id + " is " + std::to_string(rec.imputed.rows()) + " x " +
                std::to_string(rec.imputed.cols()) + ", model expects " + std::to_string(steps) + " x " +
                std::to_string(m));
    require(grad.size() == params_.size(), ErrorKind::ShapeMismatch, "gradient buffer does not match parameters");
    const std::size_t valid = validSteps == 0 ? steps : validSteps;
    require(valid <= steps, ErrorKind::ShapeMismatch, "validSteps exceeds the record length");

    std::vector<double> times = rec.times;
    if (config_.reZeroTimes) {
        const double t0 = times.front();
        for (double& t : times) {
            t -= t0;
        }
    }
    const Matrix pe = positional_encoding(times, m);

    auto param = [&](std::size_t slot) {
        const auto& s = params_.slots()[slot];
        return tape.parameter(params_.view(slot), s.rows, s.cols, grad.subspan(s.offset, s.rows * s.cols));
    };

    const bool dropping = config_.dropout > 0.0 && tape.recording();
    std::mt19937_64 rng(dropoutSeed);
    auto dropout = [&](Var x) {
        if (!dropping) {
            return x;
        }
        std::bernoulli_distribution keep(1.0 - config_.dropout);
        Matrix mask(x.rows(), x.cols());
        for (double& v : mask.values()) {
            v = keep(rng) ? 1.0 / (1.0 - config_.dropout) : 0.0;
        }
        return mul_const(x, mask);
    };

    GraphOutputs out;
    std::vector<Var> pooled;
    for (std::size_t s = 0; s < streams_.size(); ++s) {
        const Stream tag = s == 0 ? Stream::Values : Stream::Masks;
        Var x = tape.constant(pe + (tag == Stream::Values ? rec.imputed : rec.mask));
        for (std::size_t b = 0; b < streams_[s].size(); ++b) {
            const BlockSlots& bs = streams_[s][b];
            MhaVars w;
            for (std::size_t l = 0; l < bs.query.size(); ++l) {
                w.query.push_back(param(bs.query[l]));
                w.key.push_back(param(bs.key[l]));
            }
            w.value = param(bs.value);
            w.output = param(bs.output);
            const auto mha = interpretable_mha(x, w, valid);
            x = add_norm(x, dropout(mha.output), param(bs.gain1), param(bs.bias1));
            const Var ff = feed_forward(x, param(bs.w1), param(bs.b1), param(bs.w2), param(bs.b2));
            x = add_norm(x, dropout(ff), param(bs.gain2), param(bs.bias2));

            Matrix scores(valid, valid);
            const Matrix& sv = mha.scores.value();
            for (std::size_t i = 0; i < valid; ++i) {
                for (std::size_t j = 0; j < valid; ++j) {
                    scores(i, j) = sv(i, j);
                }
            }
            out.attention.push_back({b, tag, std::move(scores)});
        }
        pooled.push_back(mean_rows(x, valid));
    }
    const Var feature = pooled.size() == 1 ? pooled.front() : concat_cols(pooled[0], pooled[1]);
    for (std::size_t i = 0; i < config_.nBranches; ++i) {
        out.logits.push_back(add(matmul(feature, param(branchWeights_[i])), param(branchBiases_[i])));
    }
    return out;
}

ForwardResult MuseNet::forward(const ImputedRecord& rec, std::size_t validSteps) const
{
    Tape tape(false);
    std::vector<double> scratch(params_.size());
    auto g = record(tape, rec, scratch, validSteps);
    ForwardResult out;
    for (const Var& z : g.logits) {
        const double v = z.value()(0, 0);
        out.logits.push_back(v);
        out.probabilities.push_back(sigmoid(v));
    }
    out.attention = std::move(g.attention);
    return out;
}

double record_loss_and_gradient(const MuseNet& net, const ImputedRecord& rec, std::span<const std::size_t> branches,
                                std::span<double> grad, std::size_t validSteps, std::uint64_t dropoutSeed)
{
    Tape tape;
    auto g = net.record(tape, rec, grad, validSteps, dropoutSeed);
    if (branches.empty()) {
        return 0.0;
    }
    Var loss{};
    for (std::size_t k = 0; k < branches.size(); ++k) {
        require(branches[k] < g.logits.size(), ErrorKind::InvalidArgument, "branch index out of range");
        const Var term = bce_with_logit(g.logits[branches[k]], rec.label, kProbabilityClamp);
        loss = k == 0 ? term : add(loss, term);
    }
    const double value = loss.value()(0, 0);
    tape.backward(loss);
    return value;
}

} // namespace muse::net
