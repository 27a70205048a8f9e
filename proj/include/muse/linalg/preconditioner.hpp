// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/linalg/dense.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace muse::linalg {

/// C0 with C0 C0^T approximating a PSD matrix; dim x rank.
struct LowRankFactor {
    Matrix factor;

    [[nodiscard]] std::size_t dim() const noexcept { return factor.rows(); }
    [[nodiscard]] std::size_t rank() const noexcept { return factor.cols(); }
};

/// Greedy diagonal-pivoted Cholesky of a PSD matrix, truncated at `rank`
/// columns. Columns past an exactly exhausted diagonal are left zero, so the
/// reconstruction is exact whenever rank >= rank(A).
LowRankFactor pivoted_cholesky(const DenseSymmetricMatrix& a, std::size_t rank);

/// Trace of A - C0 C0^T, the residual left on the diagonal.
double pivoted_cholesky_residual_trace(const DenseSymmetricMatrix& a, const LowRankFactor& factor);

/// P = C0 C0^T + diag(noise). Inverse and log-determinant go through the
/// rank x rank capacitance matrix I + C0^T E^{-1} C0, never the full P.
class Preconditioner {
public:
    Preconditioner(LowRankFactor lowRank, std::vector<double> noiseDiagonal);

    /// P = E only.
    static Preconditioner diagonal(std::vector<double> noiseDiagonal);

    [[nodiscard]] std::size_t dim() const noexcept { return noise_.size(); }
    [[nodiscard]] std::size_t rank() const noexcept { return lowRank_.rank(); }
    [[nodiscard]] const LowRankFactor& low_rank() const noexcept { return lowRank_; }
    [[nodiscard]] const std::vector<double>& noise_diagonal() const noexcept { return noise_; }

    /// P^{-1} V by the Woodbury identity.
    [[nodiscard]] Matrix apply_inverse(const Matrix& v) const;
    /// P V.
    [[nodiscard]] Matrix apply(const Matrix& v) const;
    /// log|P| = log|I + C0^T E^{-1} C0| + log|E|.
    [[nodiscard]] double logdet() const;
    [[nodiscard]] Matrix dense() const;

    /// t columns d_i = C0 z_a + E^{1/2} z_b with z standard normal, so that
    /// Cov(d_i) = P. Bit-identical for a given seed.
    [[nodiscard]] Matrix sample_probes(std::size_t t, std::uint64_t seed) const;

private:
    LowRankFactor lowRank_;
    std::vector<double> noise_;
    std::optional<CholeskyFactor> capacitance_;
};

} // namespace muse::linalg
