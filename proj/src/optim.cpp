// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/optim.hpp"

#include "muse/error.hpp"

#include <cmath>

namespace muse {

void AdamState::step(std::span<double> params, std::span<const double> grads, const AdamConfig& config)
{
    require(params.size() == grads.size() && params.size() == m_.size(), ErrorKind::DimensionMismatch,
            "adam: parameter, gradient and state sizes differ");
    ++step_;
    const double t = static_cast<double>(step_);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = config.beta1 * m_[i] + (1.0 - config.beta1) * grads[i];
        v_[i] = config.beta2 * v_[i] + (1.0 - config.beta2) * grads[i] * grads[i];
        params[i] -= config.learningRate * config.weightDecay * params[i];
        params[i] -= config.learningRate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config.epsilon);
    }
}

} // namespace muse
