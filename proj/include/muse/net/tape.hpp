// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/matrix.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace muse::net {

class Tape;

/// Handle to a node on a Tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    [[nodiscard]] const Matrix& value() const;
    [[nodiscard]] std::size_t rows() const { return value().rows(); }
    [[nodiscard]] std::size_t cols() const { return value().cols(); }
};

/// Matrix-level reverse-mode tape. A non-recording tape evaluates the same
/// graph without keeping closures, which is how inference runs.
class Tape {
public:
    explicit Tape(bool recording = true) : recording_(recording) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    [[nodiscard]] bool recording() const noexcept { return recording_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

    Var constant(Matrix value);

    /// Leaf whose gradient is added into `grad` (same length as `values`) by backward().
    Var parameter(std::span<const double> values, std::size_t rows, std::size_t cols, std::span<double> grad);

    /// Seeds d(loss) = 1 and runs every recorded closure once.
    void backward(Var loss);

    [[nodiscard]] const Matrix& value(Var v) const { return nodes_[v.id].value; }
    /// Gradient accumulated at `v` by the last backward(); empty if none reached it.
    [[nodiscard]] const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

    // Internal plumbing for the op library.
    Var push(Matrix value, std::function<void(Tape&, std::size_t)> backward);
    Matrix& grad_ref(std::size_t id);
    [[nodiscard]] bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void(Tape&, std::size_t)> backward;
    };

    std::vector<Node> nodes_;
    bool recording_;
    bool consumed_ = false;
};

// Op library. Every op reads operands from their tape and records its adjoint.

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
/// a + broadcast of the 1 x cols row r.
Var add_row(Var a, Var r);
/// a (*) broadcast of the 1 x cols row g.
Var mul_row(Var a, Var g);
/// Elementwise product with a constant matrix (dropout masks).
Var mul_const(Var a, const Matrix& c);
Var scale(Var a, double s);
/// Row softmax over the first `validCols` columns; the rest get weight 0.
Var softmax_rows(Var a, std::size_t validCols);
/// Row standardization to mean 0 / variance 1 (biased variance, epsilon inside the root).
Var layer_norm_rows(Var a, double epsilon);
/// Exact GELU 0.5 x (1 + erf(x / sqrt 2)).
Var gelu(Var a);
/// 1 x cols mean over the first `validRows` rows.
Var mean_rows(Var a, std::size_t validRows);
Var concat_cols(Var a, Var b);
/// Binary cross-entropy of sigmoid(z) against `label`, probability clamped to
/// [clamp, 1 - clamp]; the gradient is zero where the clamp is active.
Var bce_with_logit(Var z, int label, double clamp);

double gelu_value(double x);
double sigmoid(double x);

} // namespace muse::net
