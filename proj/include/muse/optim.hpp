// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace muse {

struct AdamConfig {
    double learningRate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// Decoupled decay: p <- p - lr * weightDecay * p, independent of the moments.
    double weightDecay = 0.0;

    friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Adam moments for a flat parameter vector. With weightDecay > 0 this is AdamW.
class AdamState {
public:
    AdamState() = default;
    explicit AdamState(std::size_t size) : m_(size, 0.0), v_(size, 0.0) {}

    void step(std::span<double> params, std::span<const double> grads, const AdamConfig& config);

    [[nodiscard]] std::size_t steps_taken() const noexcept { return step_; }
    [[nodiscard]] const std::vector<double>& first_moment() const noexcept { return m_; }
    [[nodiscard]] const std::vector<double>& second_moment() const noexcept { return v_; }

private:
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t step_ = 0;
};

} // namespace muse
