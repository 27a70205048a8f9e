// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Test-only helpers. Eigen is used here purely as an independent oracle; the
// library itself never includes it.

#include "muse/matrix.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace muse::testing {

inline Eigen::MatrixXd to_eigen(const Matrix& m)
{
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
        }
    }
    return e;
}

inline Matrix from_eigen(const Eigen::MatrixXd& e)
{
    Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            m(i, j) = e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return m;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (double& v : m.values()) {
        v = normal(rng);
    }
    return m;
}

/// G G^T / n + shift * I.
inline Matrix random_spd(std::size_t n, std::uint64_t seed, double shift = 1.0)
{
    const Matrix g = random_matrix(n, n, seed);
    Matrix a = matmul_nt(g, g) * (1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) += shift;
    }
    return a;
}

/// Rank-`rank` PSD matrix G G^T with G n x rank.
inline Matrix random_psd_low_rank(std::size_t n, std::size_t rank, std::uint64_t seed)
{
    const Matrix g = random_matrix(n, rank, seed);
    return matmul_nt(g, g);
}

struct MgpKernelSample {
    Matrix kernel;           // task x time part only
    std::vector<double> noise;
    Matrix full;             // kernel + diag(noise)
};

/// Written straight from the covariance formula, independent of the library's
/// assembly code: cov((m,t),(m',t')) = [B B^T]_{m m'} exp(-(t-t')^2 / (2 theta^2)),
/// plus sigma^2_m on the diagonal.
inline MgpKernelSample random_mgp_kernel(std::size_t n, std::uint64_t seed, std::size_t tasks = 3)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> b(tasks * tasks);
    for (std::size_t i = 0; i < tasks; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            b[i * tasks + j] = (i == j ? 1.0 : 0.0) + 0.4 * normal(rng);
        }
    }
    const double theta = 2.0 + 6.0 * unif(rng);
    std::vector<double> sigma2(tasks);
    for (auto& s : sigma2) {
        s = 0.05 + 0.45 * unif(rng);
    }
    std::vector<std::size_t> task(n);
    std::vector<double> time(n);
    for (std::size_t i = 0; i < n; ++i) {
        task[i] = i % tasks;
        time[i] = 100.0 * unif(rng);
    }
    MgpKernelSample out{Matrix(n, n), std::vector<double>(n), Matrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double km = 0.0;
            for (std::size_t q = 0; q < tasks; ++q) {
                km += b[task[i] * tasks + q] * b[task[j] * tasks + q];
            }
            const double dt = time[i] - time[j];
            out.kernel(i, j) = km * std::exp(-dt * dt / (2.0 * theta * theta));
        }
        out.noise[i] = sigma2[task[i]];
    }
    out.full = out.kernel;
    for (std::size_t i = 0; i < n; ++i) {
        out.full(i, i) += out.noise[i];
    }
    return out;
}

inline double relative_error(const Matrix& a, const Matrix& reference)
{
    return (a - reference).frobenius_norm() / reference.frobenius_norm();
}

inline double exact_logdet(const Matrix& a)
{
    const Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(a));
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

} // namespace muse::testing
