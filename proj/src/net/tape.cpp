// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/net/tape.hpp"

#include "muse/error.hpp"
#include "muse/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace muse::net {

const Matrix& Var::value() const
{
    return tape->value(*this);
}

Var Tape::push(Matrix value, std::function<void(Tape&, std::size_t)> backward)
{
    require(!consumed_, ErrorKind::GraphNotRecorded, "tape already ran backward; record a new forward pass");
    Node node;
    node.value = std::move(value);
    if (recording_) {
        node.backward = std::move(backward);
    }
    nodes_.push_back(std::move(node));
    return Var{this, nodes_.size() - 1};
}

Matrix& Tape::grad_ref(std::size_t id)
{
    Node& n = nodes_[id];
    if (n.grad.empty()) {
        n.grad = Matrix(n.value.rows(), n.value.cols());
    }
    return n.grad;
}

Var Tape::constant(Matrix value)
{
    return push(std::move(value), {});
}

Var Tape::parameter(std::span<const double> values, std::size_t rows, std::size_t cols, std::span<double> grad)
{
    require(values.size() == rows * cols && grad.size() == values.size(), ErrorKind::ShapeMismatch,
            "parameter view does not match its shape");
    Matrix m(rows, cols, std::vector<double>(values.begin(), values.end()));
    return push(std::move(m), [grad](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(Var{&t, self});
        kernels::axpy(1.0, g.data(), grad.data(), grad.size());
    });
}

void Tape::backward(Var loss)
{
    require(recording_, ErrorKind::GraphNotRecorded, "backward on a tape that did not record");
    require(!consumed_, ErrorKind::GraphNotRecorded, "backward already ran on this tape");
    require(loss.tape == this && loss.id < nodes_.size(), ErrorKind::GraphNotRecorded,
            "loss does not belong to this tape");
    require(value(loss).size() == 1, ErrorKind::ShapeMismatch, "backward needs a scalar loss");
    consumed_ = true;
    grad_ref(loss.id)(0, 0) = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        if (nodes_[i].backward && !nodes_[i].grad.empty()) {
            nodes_[i].backward(*this, i);
        }
    }
}

namespace {

Tape& same_tape(Var a, Var b)
{
    require(a.tape != nullptr && a.tape == b.tape, ErrorKind::GraphNotRecorded, "operands live on different tapes");
    return *a.tape;
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* op)
{
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::ShapeMismatch,
            std::string(op) + ": operand shapes differ");
}

} // namespace

Var matmul(Var a, Var b)
{
    Tape& t = same_tape(a, b);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    require(av.cols() == bv.rows(), ErrorKind::ShapeMismatch, "matmul: inner dimensions differ");
    return t.push(muse::matmul(av, bv), [a, b](Tape& t, std::size_t self) {
        const Matrix& dc = t.grad(Var{&t, self});
        const Matrix& A = t.value(a);
        const Matrix& B = t.value(b);
        const auto& k = kernels::active();
        // dA = dC B^T, dB = A^T dC
        k.gemm_nt(dc.data(), B.data(), t.grad_ref(a.id).data(), A.rows(), B.cols(), A.cols(), true);
        k.gemm_tn_acc(A.data(), dc.data(), t.grad_ref(b.id).data(), A.cols(), A.rows(), B.cols());
    });
}

Var matmul_nt(Var a, Var b)
{
    Tape& t = same_tape(a, b);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    require(av.cols() == bv.cols(), ErrorKind::ShapeMismatch, "matmul_nt: inner dimensions differ");
    return t.push(muse::matmul_nt(av, bv), [a, b](Tape& t, std::size_t self) {
        const Matrix& dc = t.grad(Var{&t, self});
        const Matrix& A = t.value(a);
        const Matrix& B = t.value(b);
        const auto& k = kernels::active();
        // dA = dC B, dB = dC^T A
        k.gemm(dc.data(), B.data(), t.grad_ref(a.id).data(), A.rows(), B.rows(), A.cols(), true);
        k.gemm_tn_acc(dc.data(), A.data(), t.grad_ref(b.id).data(), B.rows(), A.rows(), A.cols());
    });
}

Var add(Var a, Var b)
{
    Tape& t = same_tape(a, b);
    check_same_shape(a.value(), b.value(), "add");
    return t.push(a.value() + b.value(), [a, b](Tape& t, std::size_t self) {
        const Matrix& dc = t.grad(Var{&t, self});
        t.grad_ref(a.id) += dc;
        t.grad_ref(b.id) += dc;
    });
}

Var add_row(Var a, Var r)
{
    Tape& t = same_tape(a, r);
    const Matrix& av = a.value();
    const Matrix& rv = r.value();
    require(rv.rows() == 1 && rv.cols() == av.cols(), ErrorKind::ShapeMismatch, "add_row: row shape");
    Matrix out = av;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        kernels::axpy(1.0, rv.data(), out.row(i).data(), out.cols());
    }
    return t.push(std::move(out), [a, r](Tape& t, std::size_t self) {
        const Matrix& dc = t.grad(Var{&t, self});
        t.grad_ref(a.id) += dc;
        Matrix& dr = t.grad_ref(r.id);
        for (std::size_t i = 0; i < dc.rows(); ++i) {
            kernels::axpy(1.0, dc.row(i).data(), dr.data(), dc.cols());
        }
    });
}

Var mul_row(Var a, Var g)
{
    Tape& t = same_tape(a, g);
    const Matrix& av = a.value();
    const Matrix& gv = g.value();
    require(gv.rows() == 1 && gv.cols() == av.cols(), ErrorKind::ShapeMismatch, "mul_row: row shape");
    Matrix out = av;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
            out(i, j) *= gv(0, j);
        }
    }
    return t.push(std::move(out), [a, g](Tape& t, std::size_t self) {
        const Matrix& dc = t.grad(Var{&t, self});
        const Matrix& A = t.value(a);
        const Matrix& G = t.value(g);
        Matrix& da = t.grad_ref(a.id);
        Matrix& dg = t.grad_ref(g.id);
        for (std::size_t i = 0; i < dc.rows(); ++i) {
            for (std::size_t j = 0; j < dc.cols(); ++j) {
                da(i, j) += dc(i, j) * G(0, j);
                dg(0, j) += dc(i, j) * A(i, j);
            }
        }
    });
}

Var mul_const(Var a, const Matrix& c)
{
    check_same_shape(a.value(), c, "mul_const");
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] *= c.data()[i];
    }
    return a.tape->push(std::move(out), [a, c](Tape& t, std::size_t self) {
        const Matrix& dc = t.grad(Var{&t, self});
        Matrix& da = t.grad_ref(a.id);
        for (std::size_t i = 0; i < dc.size(); ++i) {
            da.data()[i] += dc.data()[i] * c.data()[i];
        }
    });
}

Var scale(Var a, double s)
{
    return a.tape->push(a.value() * s, [a, s](Tape& t, std::size_t self) {
        const Matrix& dc = t.grad(Var{&t, self});
        kernels::axpy(s, dc.data(), t.grad_ref(a.id).data(), dc.size());
    });
}

Var softmax_rows(Var a, std::size_t validCols)
{
    const Matrix& av = a.value();
    require(validCols >= 1 && validCols <= av.cols(), ErrorKind::ShapeMismatch, "softmax_rows: valid column count");
    Matrix out(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.rows(); ++i) {
        const auto in = av.row(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < validCols; ++j) {
            mx = std::max(mx, in[j]);
        }
        require(std::isfinite(mx), ErrorKind::NonFinite, "softmax_rows: non-finite scores");
        double sum = 0.0;
        for (std::size_t j = 0; j < validCols; ++j) {
            out(i, j) = std::exp(in[j] - mx);
            sum += out(i, j);
        }
        for (std::size_t j = 0; j < validCols; ++j) {
            out(i, j) /= sum;
        }
    }
    return a.tape->push(std::move(out), [a, validCols](Tape& t, std::size_t self) {
        const Matrix& dy = t.grad(Var{&t, self});
        const Matrix& y = t.value(Var{&t, self});
        Matrix& da = t.grad_ref(a.id);
        for (std::size_t i = 0; i < y.rows(); ++i) {
            const double inner = kernels::dot(y.row(i).data(), dy.row(i).data(), validCols);
            for (std::size_t j = 0; j < validCols; ++j) {
                da(i, j) += y(i, j) * (dy(i, j) - inner);
            }
        }
    });
}

Var layer_norm_rows(Var a, double epsilon)
{
    const Matrix& av = a.value();
    const std::size_t n = av.cols();
    Matrix out(av.rows(), n);
    std::vector<double> inv(av.rows());
    for (std::size_t i = 0; i < av.rows(); ++i) {
        const auto x = av.row(i);
        double mean = 0.0;
        for (double v : x) {
            mean += v;
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : x) {
            var += (v - mean) * (v - mean);
        }
        var /= static_cast<double>(n);
        inv[i] = 1.0 / std::sqrt(var + epsilon);
        for (std::size_t j = 0; j < n; ++j) {
            out(i, j) = (x[j] - mean) * inv[i];
        }
    }
    return a.tape->push(std::move(out), [a, inv = std::move(inv)](Tape& t, std::size_t self) {
        const Matrix& dy = t.grad(Var{&t, self});
        const Matrix& y = t.value(Var{&t, self});
        Matrix& da = t.grad_ref(a.id);
        const double n = static_cast<double>(y.cols());
        for (std::size_t i = 0; i < y.rows(); ++i) {
            double mdy = 0.0;
            double mdyy = 0.0;
            for (std::size_t j = 0; j < y.cols(); ++j) {
                mdy += dy(i, j);
                mdyy += dy(i, j) * y(i, j);
            }
            mdy /= n;
            mdyy /= n;
            for (std::size_t j = 0; j < y.cols(); ++j) {
                da(i, j) += inv[i] * (dy(i, j) - mdy - y(i, j) * mdyy);
            }
        }
    });
}

double gelu_value(double x)
{
    return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

double sigmoid(double x)
{
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Var gelu(Var a)
{
    Matrix out = a.value();
    for (double& v : out.values()) {
        v = gelu_value(v);
    }
    return a.tape->push(std::move(out), [a](Tape& t, std::size_t self) {
        const Matrix& dy = t.grad(Var{&t, self});
        const Matrix& x = t.value(a);
        Matrix& da = t.grad_ref(a.id);
        constexpr double invSqrt2Pi = 0.39894228040143267794;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = x.data()[i];
            const double cdf = 0.5 * (1.0 + std::erf(v / std::sqrt(2.0)));
            const double pdf = invSqrt2Pi * std::exp(-0.5 * v * v);
            da.data()[i] += dy.data()[i] * (cdf + v * pdf);
        }
    });
}

Var mean_rows(Var a, std::size_t validRows)
{
    const Matrix& av = a.value();
    require(validRows >= 1 && validRows <= av.rows(), ErrorKind::ShapeMismatch, "mean_rows: valid row count");
    Matrix out(1, av.cols());
    for (std::size_t i = 0; i < validRows; ++i) {
        kernels::axpy(1.0, av.row(i).data(), out.data(), av.cols());
    }
    out *= 1.0 / static_cast<double>(validRows);
    return a.tape->push(std::move(out), [a, validRows](Tape& t, std::size_t self) {
        const Matrix& dy = t.grad(Var{&t, self});
        Matrix& da = t.grad_ref(a.id);
        const double w = 1.0 / static_cast<double>(validRows);
        for (std::size_t i = 0; i < validRows; ++i) {
            kernels::axpy(w, dy.data(), da.row(i).data(), dy.cols());
        }
    });
}

Var concat_cols(Var a, Var b)
{
    Tape& t = same_tape(a, b);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    require(av.rows() == bv.rows(), ErrorKind::ShapeMismatch, "concat_cols: row counts differ");
    Matrix out(av.rows(), av.cols() + bv.cols());
    for (std::size_t i = 0; i < av.rows(); ++i) {
        std::copy(av.row(i).begin(), av.row(i).end(), out.row(i).begin());
        std::copy(bv.row(i).begin(), bv.row(i).end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(av.cols()));
    }
    return t.push(std::move(out), [a, b](Tape& t, std::size_t self) {
        const Matrix& dy = t.grad(Var{&t, self});
        Matrix& da = t.grad_ref(a.id);
        Matrix& db = t.grad_ref(b.id);
        for (std::size_t i = 0; i < dy.rows(); ++i) {
            for (std::size_t j = 0; j < da.cols(); ++j) {
                da(i, j) += dy(i, j);
            }
            for (std::size_t j = 0; j < db.cols(); ++j) {
                db(i, j) += dy(i, da.cols() + j);
            }
        }
    });
}

Var bce_with_logit(Var z, int label, double clamp)
{
    require(z.value().size() == 1, ErrorKind::ShapeMismatch, "bce_with_logit: scalar logit expected");
    require(label == 0 || label == 1, ErrorKind::InvalidArgument, "bce_with_logit: label must be 0 or 1");
    const double raw = sigmoid(z.value()(0, 0));
    const double p = std::clamp(raw, clamp, 1.0 - clamp);
    const double loss = label == 1 ? -std::log(p) : -std::log(1.0 - p);
    const bool clamped = p != raw;
    return z.tape->push(Matrix(1, 1, loss), [z, label, p, clamped](Tape& t, std::size_t self) {
        if (clamped) {
            return;
        }
        const double dy = t.grad(Var{&t, self})(0, 0);
        t.grad_ref(z.id)(0, 0) += dy * (p - static_cast<double>(label));
    });
}

} // namespace muse::net
