// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/net/tape.hpp"

#include <span>
#include <vector>

namespace muse::net {

inline constexpr double kLayerNormEpsilon = 1e-5;

/// T x M sinusoidal encoding evaluated at the given (irregular) times.
Matrix positional_encoding(std::span<const double> times, std::size_t width);

struct AttentionOutput {
    Matrix output;
    Matrix weights;
};

/// softmax(Q K^T / sqrt(d)) V with d = Q.cols().
AttentionOutput scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v);

struct MultiHeadWeights {
    std::vector<Matrix> query; // h matrices, M x M/h
    std::vector<Matrix> key;   // h matrices, M x M/h
    Matrix value;              // M x M, shared by all heads
    Matrix output;             // M x M
};

/// Output = S V W_o where S is the sum of the per-head softmax maps.
AttentionOutput interpretable_mha(const Matrix& x, const MultiHeadWeights& weights);

/// LayerNorm(sublayer) * gain + bias + residual.
Matrix add_norm(const Matrix& residual, const Matrix& sublayer, const Matrix& gain, const Matrix& bias);

/// GELU(X W1 + b1) W2 + b2; its Add&Norm is applied by the caller.
Matrix feed_forward(const Matrix& x, const Matrix& w1, const Matrix& b1, const Matrix& w2, const Matrix& b2);

// Graph-level forms used by the model; `validSteps` masks padded keys.

struct MhaVars {
    std::vector<Var> query;
    std::vector<Var> key;
    Var value;
    Var output;
};

struct MhaResult {
    Var output;
    Var scores;
};

MhaResult interpretable_mha(Var x, const MhaVars& w, std::size_t validSteps);
Var add_norm(Var residual, Var sublayer, Var gain, Var bias);
Var feed_forward(Var x, Var w1, Var b1, Var w2, Var b2);

} // namespace muse::net
