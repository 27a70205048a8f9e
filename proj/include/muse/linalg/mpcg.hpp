// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/linalg/preconditioner.hpp"

#include <functional>
#include <span>
#include <vector>

namespace muse::linalg {

/// Symmetric tridiagonal matrix recovered from the CG coefficients of one
/// probe column.
///
/// `probeWeight` is r0^T P^{-1} r0 for that column, i.e. the squared norm of
/// the whitened starting vector. Lanczos quadrature estimates
/// z^T f(A) z as probeWeight * e1^T f(T) e1, so the weight has to travel with T.
struct TridiagonalMatrix {
    std::vector<double> diagonal;
    std::vector<double> offDiagonal;
    double probeWeight = 1.0;

    [[nodiscard]] std::size_t size() const noexcept { return diagonal.size(); }
    [[nodiscard]] Matrix dense() const;
};

/// Batched operator: out = A * in, applied to every column of `in`.
using LinearOperator = std::function<void(const Matrix& in, Matrix& out)>;

LinearOperator dense_operator(const Matrix& a);

struct SolverWorkspace {
    /// Column 0 is the right-hand side, columns 1..t are the random probes.
    Matrix probes;
    std::size_t maxIterations = 100;
    /// Per-column stop when ||r_c|| <= tolerance * ||probes_c||.
    double tolerance = 1e-8;
    std::vector<TridiagonalMatrix> tridiagonals;

    [[nodiscard]] std::size_t probe_count() const noexcept { return probes.cols() == 0 ? 0 : probes.cols() - 1; }
};

struct MpcgResult {
    /// Approximates A^{-1} probes column-wise.
    Matrix solution;
    /// One per probe column (1..t); column 0 has none.
    std::vector<TridiagonalMatrix> tridiagonals;
    /// Completed iterations per column, 0..t.
    std::vector<std::size_t> iterations;
    std::vector<double> relativeResiduals;
};

/// Preconditioned conjugate gradients on all columns at once, recording the
/// Lanczos tridiagonal of each probe column as it goes. A converged column is
/// frozen (its step length is held at zero) so batch shapes stay fixed; its
/// tridiagonal keeps the size reached at convergence.
///
/// Throws BreakdownZeroCurvature when some s^T A s <= 0 and NonFinite if a
/// coefficient goes non-finite. The result is also stored into
/// `workspace.tridiagonals`.
MpcgResult mpcg_batch(const LinearOperator& applyA, SolverWorkspace& workspace, const Preconditioner& p);

/// e1^T log(T) e1 by symmetric tridiagonal eigendecomposition.
double log_quadratic_form(const TridiagonalMatrix& t);

/// Eigenvalues of T and the first component of each unit eigenvector.
struct TridiagonalEigen {
    std::vector<double> eigenvalues;
    std::vector<double> firstComponents;
};

/// Implicit-shift QL; only the first row of the eigenvector matrix is kept.
TridiagonalEigen tridiagonal_eigen(const TridiagonalMatrix& t);

/// log|A| ~= log|P| + (1/t) sum_i w_i e1^T log(T_i) e1.
double lanczos_logdet(std::span<const TridiagonalMatrix> tridiagonals, const Preconditioner& p);

/// (1/t) sum_i <solvedProbes_i, rhsTerms_i>: with solvedProbes_i = A^{-1} d_i
/// and rhsTerms_i = D P^{-1} d_i this is unbiased for Tr(A^{-1} D).
double stochastic_trace(const Matrix& solvedProbes, const Matrix& rhsTerms);

} // namespace muse::linalg
