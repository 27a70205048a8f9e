// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops shared by the solver, the kernel assembly and the
// network. Each kernel has a scalar reference implementation and, on x86-64,
// an AVX2+FMA variant. The variant is picked once at startup from CPUID; set
// MUSE_SIMD=scalar in the environment to force the reference path.
//
// All matrices are dense row-major.

namespace muse::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;

    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out[j] = sum_i a[i, j] * b[i, j]   (a, b are rows x cols)
    void (*column_dots)(const double* a, const double* b, std::size_t rows, std::size_t cols,
                        double* out);
    // C (m x n) = A (m x k) * B (k x n), or C += A * B when accumulate is set
    void (*gemm)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n, bool accumulate);
    // C (m x n) = A (m x k) * B^T with B stored (n x k)
    void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n, bool accumulate);
    // C (m x n) += A^T * B with A stored (k x m), B stored (k x n)
    void (*gemm_tn_acc)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                        std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// nullptr when the host CPU or the build lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

/// The table selected for this process.
const KernelTable& active() noexcept;

std::string_view isa_name(Isa isa) noexcept;

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }

inline void axpy(double alpha, const double* x, double* y, std::size_t n)
{
    active().axpy(alpha, x, y, n);
}

} // namespace muse::kernels
