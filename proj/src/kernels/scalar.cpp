// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/kernels.hpp"

#include <algorithm>

namespace muse::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void column_dots_scalar(const double* a, const double* b, std::size_t rows, std::size_t cols,
                        double* out)
{
    std::fill(out, out + cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* ar = a + i * cols;
        const double* br = b + i * cols;
        for (std::size_t j = 0; j < cols; ++j) {
            out[j] += ar[j] * br[j];
        }
    }
}

void gemm_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n, bool accumulate)
{
    if (!accumulate) {
        std::fill(c, c + m * n, 0.0);
    }
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a[i * k + p];
            if (aip == 0.0) {
                continue;
            }
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aip * brow[j];
            }
        }
    }
}

void gemm_nt_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n, bool accumulate)
{
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = dot_scalar(a + i * k, b + j * k, k);
            c[i * n + j] = accumulate ? c[i * n + j] + v : v;
        }
    }
}

void gemm_tn_acc_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                        std::size_t n)
{
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double api = arow[i];
            if (api == 0.0) {
                continue;
            }
            double* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += api * brow[j];
            }
        }
    }
}

} // namespace

const KernelTable& scalar_table() noexcept
{
    static const KernelTable table{Isa::Scalar,    dot_scalar,     axpy_scalar,       column_dots_scalar,
                                   gemm_scalar,    gemm_nt_scalar, gemm_tn_acc_scalar};
    return table;
}

} // namespace muse::kernels
