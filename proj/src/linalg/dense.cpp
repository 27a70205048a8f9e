// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/linalg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace muse::linalg {

DenseSymmetricMatrix::DenseSymmetricMatrix(Matrix entries) : entries_(std::move(entries))
{
    require(entries_.rows() == entries_.cols() && entries_.rows() > 0, ErrorKind::DimensionMismatch,
            "symmetric matrix must be square and non-empty");
    require(entries_.all_finite(), ErrorKind::NonFinite, "symmetric matrix has non-finite entries");
    double scale = 0.0;
    for (double v : entries_.values()) {
        scale = std::max(scale, std::abs(v));
    }
    const std::size_t n = entries_.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            require(std::abs(entries_(i, j) - entries_(j, i)) <= 1e-12 * scale, ErrorKind::InvalidArgument,
                    "matrix is not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        }
    }
}

CholeskyFactor::CholeskyFactor(const DenseSymmetricMatrix& a, double pivotFloor) : lower_(a.dim(), a.dim())
{
    const std::size_t n = a.dim();
    const auto& k = kernels::active();
    for (std::size_t j = 0; j < n; ++j) {
        const double* lj = lower_.data() + j * n;
        const double pivot = a(j, j) - k.dot(lj, lj, j);
        if (!(pivot > pivotFloor)) {
            throw Error(ErrorKind::NotPositiveDefinite,
                        "pivot " + std::to_string(pivot) + " at index " + std::to_string(j));
        }
        const double ljj = std::sqrt(pivot);
        lower_(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            const double* li = lower_.data() + i * n;
            lower_(i, j) = (a(i, j) - k.dot(li, lj, j)) / ljj;
        }
    }
}

Matrix CholeskyFactor::solve_lower(const Matrix& b) const
{
    const std::size_t n = dim();
    require(b.rows() == n, ErrorKind::DimensionMismatch, "cholesky solve: right-hand side rows");
    const std::size_t c = b.cols();
    Matrix x = b;
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < n; ++i) {
        double* xi = x.data() + i * c;
        for (std::size_t p = 0; p < i; ++p) {
            const double lip = lower_(i, p);
            if (lip != 0.0) {
                k.axpy(-lip, x.data() + p * c, xi, c);
            }
        }
        const double inv = 1.0 / lower_(i, i);
        for (std::size_t j = 0; j < c; ++j) {
            xi[j] *= inv;
        }
    }
    return x;
}

Matrix CholeskyFactor::solve(const Matrix& b) const
{
    const std::size_t n = dim();
    const std::size_t c = b.cols();
    Matrix x = solve_lower(b);
    const auto& k = kernels::active();
    // Back substitution with L^T: once row i is final, eliminate it from rows above.
    for (std::size_t ii = n; ii-- > 0;) {
        double* xi = x.data() + ii * c;
        const double inv = 1.0 / lower_(ii, ii);
        for (std::size_t j = 0; j < c; ++j) {
            xi[j] *= inv;
        }
        for (std::size_t p = 0; p < ii; ++p) {
            const double lip = lower_(ii, p);
            if (lip != 0.0) {
                k.axpy(-lip, xi, x.data() + p * c, c);
            }
        }
    }
    return x;
}

double CholeskyFactor::logdet() const noexcept
{
    double acc = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        acc += std::log(lower_(i, i));
    }
    return 2.0 * acc;
}

Matrix CholeskyFactor::inverse() const
{
    return solve(Matrix::identity(dim()));
}

Matrix cholesky_solve(const DenseSymmetricMatrix& a, const Matrix& b)
{
    return CholeskyFactor(a).solve(b);
}

} // namespace muse::linalg
