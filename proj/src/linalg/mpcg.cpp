// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/linalg/mpcg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace muse::linalg {
namespace {

constexpr double kDivisionFloor = 1e-300;
// Below this relative residual the Krylov space is exhausted in floating
// point; further steps would only feed round-off into T.
constexpr double kExhaustedResidual = 4.0 * std::numeric_limits<double>::epsilon();

double guarded(double denominator)
{
    if (std::abs(denominator) < kDivisionFloor) {
        return denominator < 0.0 ? -kDivisionFloor : kDivisionFloor;
    }
    return denominator;
}

std::vector<double> column_norms(const Matrix& m)
{
    std::vector<double> out(m.cols());
    kernels::active().column_dots(m.data(), m.data(), m.rows(), m.cols(), out.data());
    for (double& v : out) {
        v = std::sqrt(v);
    }
    return out;
}

} // namespace

Matrix TridiagonalMatrix::dense() const
{
    const std::size_t k = size();
    Matrix t(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        t(i, i) = diagonal[i];
        if (i + 1 < k) {
            t(i, i + 1) = offDiagonal[i];
            t(i + 1, i) = offDiagonal[i];
        }
    }
    return t;
}

LinearOperator dense_operator(const Matrix& a)
{
    return [&a](const Matrix& in, Matrix& out) {
        kernels::active().gemm(a.data(), in.data(), out.data(), a.rows(), a.cols(), in.cols(), false);
    };
}

MpcgResult mpcg_batch(const LinearOperator& applyA, SolverWorkspace& workspace, const Preconditioner& p)
{
    const Matrix& rhs = workspace.probes;
    const std::size_t n = rhs.rows();
    const std::size_t c = rhs.cols();
    require(n == p.dim() && c >= 1, ErrorKind::DimensionMismatch, "mpcg: workspace shape vs preconditioner");
    require(rhs.all_finite(), ErrorKind::NonFinite, "mpcg: non-finite workspace column");
    require(workspace.maxIterations >= 1, ErrorKind::InvalidArgument, "mpcg: maxIterations must be positive");
    require(workspace.tolerance >= 0.0, ErrorKind::InvalidArgument, "mpcg: tolerance must be non-negative");

    const auto& kern = kernels::active();
    const std::vector<double> rhsNorm = column_norms(rhs);

    Matrix u(n, c);
    Matrix r = rhs * -1.0;
    Matrix z = p.apply_inverse(r);
    Matrix s = z * -1.0;
    Matrix as(n, c);

    std::vector<double> rz(c), rzNext(c), sas(c), alpha(c, 0.0), alphaPrev(c, 0.0), betaPrev(c, 0.0);
    kern.column_dots(r.data(), z.data(), n, c, rz.data());

    MpcgResult result;
    result.iterations.assign(c, 0);
    result.relativeResiduals.assign(c, 0.0);
    result.tridiagonals.resize(c - 1);
    for (std::size_t col = 1; col < c; ++col) {
        result.tridiagonals[col - 1].probeWeight = rz[col];
    }

    std::vector<bool> active(c, true);
    for (std::size_t col = 0; col < c; ++col) {
        if (rhsNorm[col] == 0.0) {
            active[col] = false;
        }
    }
    auto any_active = [&] { return std::any_of(active.begin(), active.end(), [](bool a) { return a; }); };

    for (std::size_t j = 0; j < workspace.maxIterations && any_active(); ++j) {
        applyA(s, as);
        kern.column_dots(s.data(), as.data(), n, c, sas.data());
        for (std::size_t col = 0; col < c; ++col) {
            if (!active[col]) {
                alpha[col] = 0.0;
                continue;
            }
            if (!(sas[col] > 0.0)) {
                throw Error(ErrorKind::BreakdownZeroCurvature,
                            "s^T A s = " + std::to_string(sas[col]) + " in column " + std::to_string(col) +
                                " at iteration " + std::to_string(j));
            }
            alpha[col] = rz[col] / guarded(sas[col]);
            if (!std::isfinite(alpha[col])) {
                throw Error(ErrorKind::NonFinite, "mpcg: step length in column " + std::to_string(col));
            }
        }

        // U += S diag(alpha); R += A S diag(alpha)
        for (std::size_t i = 0; i < n; ++i) {
            double* ui = u.data() + i * c;
            double* ri = r.data() + i * c;
            const double* si = s.data() + i * c;
            const double* asi = as.data() + i * c;
            for (std::size_t col = 0; col < c; ++col) {
                ui[col] += alpha[col] * si[col];
                ri[col] += alpha[col] * asi[col];
            }
        }

        const std::vector<double> resNorm = column_norms(r);
        z = p.apply_inverse(r);
        kern.column_dots(r.data(), z.data(), n, c, rzNext.data());

        std::vector<double> beta(c, 0.0);
        for (std::size_t col = 0; col < c; ++col) {
            if (!active[col]) {
                continue;
            }
            result.iterations[col] = j + 1;
            result.relativeResiduals[col] = resNorm[col] / rhsNorm[col];
            if (col > 0) {
                auto& t = result.tridiagonals[col - 1];
                double d = 1.0 / alpha[col];
                if (j > 0) {
                    d += betaPrev[col] / alphaPrev[col];
                    t.offDiagonal.push_back(std::sqrt(betaPrev[col]) / alphaPrev[col]);
                }
                t.diagonal.push_back(d);
            }
            const double rel = result.relativeResiduals[col];
            if (rel <= workspace.tolerance || rel <= kExhaustedResidual || rzNext[col] <= 0.0) {
                active[col] = false;
                continue;
            }
            beta[col] = rzNext[col] / guarded(rz[col]);
            if (!std::isfinite(beta[col])) {
                throw Error(ErrorKind::NonFinite, "mpcg: conjugation coefficient in column " + std::to_string(col));
            }
        }

        // S = -Z + S diag(beta); frozen columns keep beta = 0 and are never stepped again.
        for (std::size_t i = 0; i < n; ++i) {
            double* si = s.data() + i * c;
            const double* zi = z.data() + i * c;
            for (std::size_t col = 0; col < c; ++col) {
                si[col] = -zi[col] + beta[col] * si[col];
            }
        }
        for (std::size_t col = 0; col < c; ++col) {
            if (active[col]) {
                alphaPrev[col] = alpha[col];
                betaPrev[col] = beta[col];
                rz[col] = rzNext[col];
            }
        }
    }

    result.solution = std::move(u);
    workspace.tridiagonals = result.tridiagonals;
    return result;
}

TridiagonalEigen tridiagonal_eigen(const TridiagonalMatrix& t)
{
    const std::size_t n = t.size();
    require(n >= 1 && t.offDiagonal.size() + 1 == n, ErrorKind::DimensionMismatch,
            "tridiagonal: off-diagonal length must be size - 1");
    std::vector<double> d = t.diagonal;
    std::vector<double> e(n, 0.0);
    std::copy(t.offDiagonal.begin(), t.offDiagonal.end(), e.begin());
    std::vector<double> z(n, 0.0);
    z[0] = 1.0;

    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m = l;
        while (true) {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) {
                    break;
                }
            }
            if (m == l) {
                break;
            }
            if (++iter > 60) {
                throw Error(ErrorKind::NonFinite, "tridiagonal eigensolver did not converge");
            }
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            bool deflated = false;
            for (std::size_t ii = m; ii-- > l;) {
                double f = s * e[ii];
                const double b = c * e[ii];
                r = std::hypot(f, g);
                e[ii + 1] = r;
                if (r == 0.0) {
                    d[ii + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[ii + 1] - p;
                r = (d[ii] - g) * s + 2.0 * c * b;
                p = s * r;
                d[ii + 1] = g + p;
                g = c * r - b;
                f = z[ii + 1];
                z[ii + 1] = s * z[ii] + c * f;
                z[ii] = c * z[ii] - s * f;
            }
            if (deflated) {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    return {std::move(d), std::move(z)};
}

double log_quadratic_form(const TridiagonalMatrix& t)
{
    const TridiagonalEigen eig = tridiagonal_eigen(t);
    double acc = 0.0;
    for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k) {
        const double lambda = eig.eigenvalues[k];
        if (!(lambda > 0.0)) {
            throw Error(ErrorKind::NonPositiveEigenvalue, "tridiagonal eigenvalue " + std::to_string(lambda));
        }
        acc += eig.firstComponents[k] * eig.firstComponents[k] * std::log(lambda);
    }
    return acc;
}

double lanczos_logdet(std::span<const TridiagonalMatrix> tridiagonals, const Preconditioner& p)
{
    require(!tridiagonals.empty(), ErrorKind::InvalidArgument, "lanczos_logdet needs at least one probe");
    double acc = 0.0;
    for (const auto& t : tridiagonals) {
        acc += t.probeWeight * log_quadratic_form(t);
    }
    return p.logdet() + acc / static_cast<double>(tridiagonals.size());
}

double stochastic_trace(const Matrix& solvedProbes, const Matrix& rhsTerms)
{
    require(solvedProbes.rows() == rhsTerms.rows() && solvedProbes.cols() == rhsTerms.cols(),
            ErrorKind::DimensionMismatch, "stochastic_trace: probe and rhs shapes differ");
    require(solvedProbes.cols() >= 1, ErrorKind::DimensionMismatch, "stochastic_trace: no probe columns");
    std::vector<double> dots(solvedProbes.cols());
    kernels::active().column_dots(solvedProbes.data(), rhsTerms.data(), solvedProbes.rows(), solvedProbes.cols(),
                                  dots.data());
    double acc = 0.0;
    for (double v : dots) {
        acc += v;
    }
    return acc / static_cast<double>(dots.size());
}

} // namespace muse::linalg
