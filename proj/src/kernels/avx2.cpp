// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma. Nothing in this file may run before dispatch has
// confirmed the CPU supports both extensions.

#include "muse/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

namespace muse::kernels::detail {
namespace {

inline double hsum(__m256d v)
{
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    const __m128d sh = _mm_unpackhi_pd(s, s);
    return _mm_cvtsd_f64(_mm_add_sd(s, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n)
{
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void column_dots_avx2(const double* a, const double* b, std::size_t rows, std::size_t cols,
                      double* out)
{
    std::fill(out, out + cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* ar = a + r * cols;
        const double* br = b + r * cols;
        std::size_t j = 0;
        for (; j + 4 <= cols; j += 4) {
            _mm256_storeu_pd(out + j, _mm256_fmadd_pd(_mm256_loadu_pd(ar + j), _mm256_loadu_pd(br + j),
                                                      _mm256_loadu_pd(out + j)));
        }
        for (; j < cols; ++j) {
            out[j] += ar[j] * br[j];
        }
    }
}

void gemm_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
               bool accumulate)
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
            axpy_avx2(aip, b + p * n, crow, n);
        }
    }
}

void gemm_nt_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n, bool accumulate)
{
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = dot_avx2(a + i * k, b + j * k, k);
            c[i * n + j] = accumulate ? c[i * n + j] + v : v;
        }
    }
}

void gemm_tn_acc_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                      std::size_t n)
{
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            if (arow[i] != 0.0) {
                axpy_avx2(arow[i], brow, c + i * n, n);
            }
        }
    }
}

} // namespace

const KernelTable& avx2_table_impl() noexcept
{
    static const KernelTable table{Isa::Avx2,  dot_avx2,     axpy_avx2,       column_dots_avx2,
                                   gemm_avx2,  gemm_nt_avx2, gemm_tn_acc_avx2};
    return table;
}

} // namespace muse::kernels::detail
