// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/net/layers.hpp"

#include "muse/error.hpp"

#include <cmath>

namespace muse::net {

Matrix positional_encoding(std::span<const double> times, std::size_t width)
{
    require(!times.empty() && width >= 1, ErrorKind::ShapeMismatch, "positional_encoding needs T >= 1 and M >= 1");
    Matrix pe(times.size(), width);
    for (std::size_t t = 0; t < times.size(); ++t) {
        for (std::size_t j = 0; j < width; j += 2) {
            const double freq = std::pow(10000.0, static_cast<double>(j) / static_cast<double>(width));
            pe(t, j) = std::sin(times[t] / freq);
            if (j + 1 < width) {
                pe(t, j + 1) = std::cos(times[t] / freq);
            }
        }
    }
    return pe;
}

MhaResult interpretable_mha(Var x, const MhaVars& w, std::size_t validSteps)
{
    require(!w.query.empty() && w.query.size() == w.key.size(), ErrorKind::ShapeMismatch,
            "interpretable_mha: one query and one key projection per head");
    const double inv = 1.0 / std::sqrt(static_cast<double>(w.query.front().cols()));
    const Var v = matmul(x, w.value);
    Var s{};
    for (std::size_t l = 0; l < w.query.size(); ++l) {
        const Var q = matmul(x, w.query[l]);
        const Var k = matmul(x, w.key[l]);
        const Var a = softmax_rows(scale(matmul_nt(q, k), inv), validSteps);
        s = l == 0 ? a : add(s, a);
    }
    return {matmul(matmul(s, v), w.output), s};
}

Var add_norm(Var residual, Var sublayer, Var gain, Var bias)
{
    return add(add_row(mul_row(layer_norm_rows(sublayer, kLayerNormEpsilon), gain), bias), residual);
}

Var feed_forward(Var x, Var w1, Var b1, Var w2, Var b2)
{
    return add_row(matmul(gelu(add_row(matmul(x, w1), b1)), w2), b2);
}

AttentionOutput scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v)
{
    require(q.cols() == k.cols() && k.rows() == v.rows() && q.rows() >= 1, ErrorKind::ShapeMismatch,
            "scaled_dot_attention: shapes do not line up");
    Tape t(false);
    const double inv = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    const Var w = softmax_rows(scale(matmul_nt(t.constant(q), t.constant(k)), inv), k.rows());
    const Var out = matmul(w, t.constant(v));
    return {out.value(), w.value()};
}

AttentionOutput interpretable_mha(const Matrix& x, const MultiHeadWeights& weights)
{
    const std::size_t m = x.cols();
    const std::size_t h = weights.query.size();
    require(h >= 1 && m % h == 0, ErrorKind::HeadsDontDivideWidth,
            std::to_string(h) + " heads do not divide width " + std::to_string(m));
    Tape t(false);
    MhaVars w;
    for (std::size_t l = 0; l < h; ++l) {
        w.query.push_back(t.constant(weights.query[l]));
        w.key.push_back(t.constant(weights.key[l]));
    }
    w.value = t.constant(weights.value);
    w.output = t.constant(weights.output);
    const auto r = interpretable_mha(t.constant(x), w, x.rows());
    return {r.output.value(), r.scores.value()};
}

Matrix add_norm(const Matrix& residual, const Matrix& sublayer, const Matrix& gain, const Matrix& bias)
{
    Tape t(false);
    return add_norm(t.constant(residual), t.constant(sublayer), t.constant(gain), t.constant(bias)).value();
}

Matrix feed_forward(const Matrix& x, const Matrix& w1, const Matrix& b1, const Matrix& w2, const Matrix& b2)
{
    Tape t(false);
    return feed_forward(t.constant(x), t.constant(w1), t.constant(b1), t.constant(w2), t.constant(b2)).value();
}

} // namespace muse::net
