// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/matrix.hpp"

namespace muse::linalg {

/// Square matrix checked on construction to be finite and symmetric to 1e-12
/// relative to its largest entry.
class DenseSymmetricMatrix {
public:
    explicit DenseSymmetricMatrix(Matrix entries);

    [[nodiscard]] std::size_t dim() const noexcept { return entries_.rows(); }
    [[nodiscard]] const Matrix& matrix() const noexcept { return entries_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return entries_(i, j); }

private:
    Matrix entries_;
};

/// Lower-triangular L with A = L L^T.
class CholeskyFactor {
public:
    /// Throws NotPositiveDefinite when a pivot falls to or below `pivotFloor`.
    explicit CholeskyFactor(const DenseSymmetricMatrix& a, double pivotFloor = 0.0);

    [[nodiscard]] std::size_t dim() const noexcept { return lower_.rows(); }
    [[nodiscard]] const Matrix& lower() const noexcept { return lower_; }

    /// Solves A X = B for every column of B.
    [[nodiscard]] Matrix solve(const Matrix& b) const;
    /// L^{-1} B.
    [[nodiscard]] Matrix solve_lower(const Matrix& b) const;
    [[nodiscard]] double logdet() const noexcept;
    [[nodiscard]] Matrix inverse() const;

private:
    Matrix lower_;
};

Matrix cholesky_solve(const DenseSymmetricMatrix& a, const Matrix& b);

} // namespace muse::linalg
