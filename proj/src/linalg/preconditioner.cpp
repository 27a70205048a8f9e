// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/linalg/preconditioner.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace muse::linalg {

LowRankFactor pivoted_cholesky(const DenseSymmetricMatrix& a, std::size_t rank)
{
    const std::size_t n = a.dim();
    require(rank >= 1 && rank <= n, ErrorKind::RankExceedsDim,
            "rank " + std::to_string(rank) + " outside [1, " + std::to_string(n) + "]");

    // Work column-major in a (rank x n) buffer so each new column is contiguous.
    Matrix cols(rank, n);
    std::vector<double> diag(n);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = a(i, i);
        trace += std::abs(diag[i]);
    }
    const double floor = 1e-14 * std::max(trace, 1e-300);

    for (std::size_t k = 0; k < rank; ++k) {
        const auto pivot_it = std::max_element(diag.begin(), diag.end());
        const std::size_t p = static_cast<std::size_t>(pivot_it - diag.begin());
        const double dp = *pivot_it;
        if (!(dp > floor)) {
            break;
        }
        const double root = std::sqrt(dp);
        double* lk = cols.data() + k * n;
        for (std::size_t i = 0; i < n; ++i) {
            double v = a(i, p);
            for (std::size_t j = 0; j < k; ++j) {
                v -= cols(j, i) * cols(j, p);
            }
            lk[i] = v / root;
        }
        for (std::size_t i = 0; i < n; ++i) {
            diag[i] -= lk[i] * lk[i];
        }
        diag[p] = 0.0;
    }
    return {cols.transpose()};
}

double pivoted_cholesky_residual_trace(const DenseSymmetricMatrix& a, const LowRankFactor& factor)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const auto row = factor.factor.row(i);
        acc += a(i, i) - kernels::dot(row.data(), row.data(), row.size());
    }
    return acc;
}

Preconditioner::Preconditioner(LowRankFactor lowRank, std::vector<double> noiseDiagonal)
    : lowRank_(std::move(lowRank)), noise_(std::move(noiseDiagonal))
{
    require(!noise_.empty(), ErrorKind::InvalidArgument, "preconditioner needs a non-empty diagonal");
    require(lowRank_.rank() == 0 || lowRank_.dim() == noise_.size(), ErrorKind::DimensionMismatch,
            "low-rank factor rows must match the noise diagonal");
    for (double e : noise_) {
        require(std::isfinite(e) && e > 0.0, ErrorKind::InvalidArgument,
                "noise diagonal must be strictly positive");
    }
    if (lowRank_.rank() == 0) {
        return;
    }
    const std::size_t n = noise_.size();
    const std::size_t r = lowRank_.rank();
    Matrix scaled = lowRank_.factor;
    for (std::size_t i = 0; i < n; ++i) {
        const double inv = 1.0 / noise_[i];
        for (std::size_t j = 0; j < r; ++j) {
            scaled(i, j) *= inv;
        }
    }
    Matrix cap = matmul_tn(lowRank_.factor, scaled);
    for (std::size_t j = 0; j < r; ++j) {
        cap(j, j) += 1.0;
    }
    // Symmetrize round-off before the symmetry check.
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = i + 1; j < r; ++j) {
            const double m = 0.5 * (cap(i, j) + cap(j, i));
            cap(i, j) = m;
            cap(j, i) = m;
        }
    }
    try {
        capacitance_.emplace(DenseSymmetricMatrix(std::move(cap)));
    } catch (const Error& e) {
        throw Error(ErrorKind::SingularInnerMatrix, e.what());
    }
}

Preconditioner Preconditioner::diagonal(std::vector<double> noiseDiagonal)
{
    return {LowRankFactor{Matrix(noiseDiagonal.size(), 0)}, std::move(noiseDiagonal)};
}

Matrix Preconditioner::apply_inverse(const Matrix& v) const
{
    require(v.rows() == dim(), ErrorKind::DimensionMismatch, "preconditioner apply_inverse");
    const std::size_t c = v.cols();
    Matrix ev = v;
    for (std::size_t i = 0; i < dim(); ++i) {
        const double inv = 1.0 / noise_[i];
        for (std::size_t j = 0; j < c; ++j) {
            ev(i, j) *= inv;
        }
    }
    if (!capacitance_) {
        return ev;
    }
    const Matrix inner = capacitance_->solve(matmul_tn(lowRank_.factor, ev));
    Matrix correction = matmul(lowRank_.factor, inner);
    for (std::size_t i = 0; i < dim(); ++i) {
        const double inv = 1.0 / noise_[i];
        for (std::size_t j = 0; j < c; ++j) {
            ev(i, j) -= inv * correction(i, j);
        }
    }
    return ev;
}

Matrix Preconditioner::apply(const Matrix& v) const
{
    require(v.rows() == dim(), ErrorKind::DimensionMismatch, "preconditioner apply");
    Matrix out = v;
    for (std::size_t i = 0; i < dim(); ++i) {
        for (std::size_t j = 0; j < v.cols(); ++j) {
            out(i, j) *= noise_[i];
        }
    }
    if (rank() > 0) {
        out += matmul(lowRank_.factor, matmul_tn(lowRank_.factor, v));
    }
    return out;
}

double Preconditioner::logdet() const
{
    double acc = 0.0;
    for (double e : noise_) {
        acc += std::log(e);
    }
    if (capacitance_) {
        acc += capacitance_->logdet();
    }
    return acc;
}

Matrix Preconditioner::dense() const
{
    Matrix p = rank() > 0 ? matmul_nt(lowRank_.factor, lowRank_.factor) : Matrix(dim(), dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        p(i, i) += noise_[i];
    }
    return p;
}

Matrix Preconditioner::sample_probes(std::size_t t, std::uint64_t seed) const
{
    require(t >= 1, ErrorKind::InvalidArgument, "probe count must be at least 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = dim();
    const std::size_t r = rank();
    // Draw z in (column, component) order so the stream layout is fixed.
    Matrix lowRankDraws(r, t);
    Matrix noiseDraws(n, t);
    for (std::size_t col = 0; col < t; ++col) {
        for (std::size_t a = 0; a < r; ++a) {
            lowRankDraws(a, col) = normal(rng);
        }
        for (std::size_t i = 0; i < n; ++i) {
            noiseDraws(i, col) = normal(rng);
        }
    }
    Matrix probes = r > 0 ? matmul(lowRank_.factor, lowRankDraws) : Matrix(n, t);
    for (std::size_t i = 0; i < n; ++i) {
        const double root = std::sqrt(noise_[i]);
        for (std::size_t col = 0; col < t; ++col) {
            probes(i, col) += root * noiseDraws(i, col);
        }
    }
    return probes;
}

} // namespace muse::linalg
