// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/mgp/likelihood.hpp"

#include "muse/linalg/mpcg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace muse::mgp {
namespace {

bool is_solver_failure(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::BreakdownZeroCurvature:
    case ErrorKind::NonFinite:
    case ErrorKind::NonPositiveEigenvalue:
    case ErrorKind::SingularInnerMatrix:
        return true;
    default:
        return false;
    }
}

template <typename Fn>
auto guard_solver(Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const Error& e) {
        if (is_solver_failure(e.kind())) {
            throw Error(ErrorKind::SolverBreakdown, e.what());
        }
        throw;
    }
}

double temporal(double dt, double theta)
{
    return std::exp(-0.5 * dt * dt / (theta * theta));
}

linalg::Preconditioner build_preconditioner(const AssembledKernel& kernel, std::size_t rank)
{
    const std::size_t r = std::clamp<std::size_t>(rank, 1, kernel.size());
    return {linalg::pivoted_cholesky(linalg::DenseSymmetricMatrix(kernel.kernel), r), kernel.noise};
}

Matrix make_probes(const linalg::Preconditioner& p, const SolverOptions& options)
{
    if (options.probeMode == ProbeMode::Gaussian) {
        require(options.probes >= 1, ErrorKind::InvalidArgument, "mpcg path needs at least one probe");
        return p.sample_probes(options.probes, options.seed);
    }
    const std::size_t n = p.dim();
    const linalg::CholeskyFactor chol(linalg::DenseSymmetricMatrix(p.dense()));
    return chol.lower() * std::sqrt(static_cast<double>(n));
}

NllResult dense_nll(const AssembledKernel& kernel, std::span<const double> y, const MgpHyperparameters& hp)
{
    const std::size_t n = kernel.size();
    const linalg::CholeskyFactor chol(linalg::DenseSymmetricMatrix(kernel.matrix));
    const Matrix alpha = chol.solve(Matrix::column(y));
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        quad += y[i] * alpha(i, 0);
    }
    Matrix w = chol.inverse();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            w(i, j) -= alpha(i, 0) * alpha(j, 0);
        }
    }
    NllResult out;
    out.nll = chol.logdet() + quad + 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    out.gradient = contract_covariance_derivatives(kernel, w, hp);
    return out;
}

NllResult mpcg_nll(const AssembledKernel& kernel, std::span<const double> y, const MgpHyperparameters& hp,
                   const SolverOptions& options)
{
    const std::size_t n = kernel.size();
    const linalg::Preconditioner p = build_preconditioner(kernel, options.preconditionerRank);
    const Matrix d = make_probes(p, options);
    const std::size_t t = d.cols();

    linalg::SolverWorkspace ws;
    ws.probes = Matrix(n, t + 1);
    ws.probes.set_col(0, y);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(d.row(i).begin(), d.row(i).end(), ws.probes.row(i).begin() + 1);
    }
    ws.maxIterations = options.maxIterations;
    ws.tolerance = options.tolerance;
    const auto res = linalg::mpcg_batch(linalg::dense_operator(kernel.matrix), ws, p);

    const double logdet = linalg::lanczos_logdet(res.tridiagonals, p);
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        quad += y[i] * res.solution(i, 0);
    }

    // Tr(Sigma^{-1} dSigma) ~ (1/t) sum_i (Sigma^{-1} d_i)^T dSigma (P^{-1} d_i) = <dSigma, U W^T / t>.
    Matrix u(n, t);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(res.solution.row(i).begin() + 1, res.solution.row(i).end(), u.row(i).begin());
    }
    const Matrix whitened = p.apply_inverse(d);
    Matrix x = matmul_nt(u, whitened) * (1.0 / static_cast<double>(t));
    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            w(i, j) = 0.5 * (x(i, j) + x(j, i)) - res.solution(i, 0) * res.solution(j, 0);
        }
    }
    NllResult out;
    out.nll = logdet + quad + 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    out.gradient = contract_covariance_derivatives(kernel, w, hp);
    out.iterations = res.iterations;
    return out;
}

} // namespace

std::vector<double> contract_covariance_derivatives(const AssembledKernel& kernel, const Matrix& weights,
                                                    const MgpHyperparameters& hp)
{
    const std::size_t n = kernel.size();
    const std::size_t m = hp.tasks();
    const std::size_t q = hp.rank();
    require(weights.rows() == n && weights.cols() == n, ErrorKind::DimensionMismatch, "gradient weights shape");
    const double theta = hp.lengthscale;

    // G_ab = sum_{m_i = a, m_j = b} W_ij k_t(i, j); plus the jitter's dependence on diag(B B^T).
    Matrix g(m, m);
    double thetaGrad = 0.0;
    double traceW = 0.0;
    std::vector<double> noiseGrad(m, 0.0);
    std::vector<double> taskCount(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pi = kernel.points[i];
        for (std::size_t j = 0; j < n; ++j) {
            const auto& pj = kernel.points[j];
            const double dt = pi.time - pj.time;
            const double wij = weights(i, j);
            g(pi.task, pj.task) += wij * temporal(dt, theta);
            thetaGrad += wij * kernel.kernel(i, j) * dt * dt / (theta * theta);
        }
        traceW += weights(i, i);
        noiseGrad[pi.task] += weights(i, i);
        taskCount[pi.task] += 1.0;
    }
    for (std::size_t a = 0; a < m; ++a) {
        g(a, a) += traceW * kRelativeJitter * taskCount[a] / static_cast<double>(n);
    }
    const Matrix gb = matmul(g, hp.taskFactor);

    std::vector<double> grad(MgpHyperparameters::unconstrained_size(m, q), 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t j = 0; j <= std::min(a, q - 1); ++j) {
            grad[MgpHyperparameters::factor_slot(a, j, q)] = 2.0 * gb(a, j);
        }
    }
    const std::size_t base = MgpHyperparameters::factor_slot(m, 0, q);
    for (std::size_t a = 0; a < m; ++a) {
        grad[base + a] = noiseGrad[a] * (hp.noiseVariances[a] - MgpHyperparameters::kNoiseFloor);
    }
    grad[base + m] = thetaGrad;
    return grad;
}

Matrix covariance_derivative(const AssembledKernel& kernel, const MgpHyperparameters& hp, std::size_t coordinate)
{
    const std::size_t n = kernel.size();
    const std::size_t m = hp.tasks();
    const std::size_t q = hp.rank();
    const std::size_t base = MgpHyperparameters::factor_slot(m, 0, q);
    require(coordinate < base + m + 1, ErrorKind::InvalidArgument, "covariance_derivative: coordinate out of range");
    Matrix d(n, n);
    if (coordinate < base) {
        std::size_t row = 0;
        std::size_t colIdx = 0;
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t j = 0; j <= std::min(a, q - 1); ++j) {
                if (MgpHyperparameters::factor_slot(a, j, q) == coordinate) {
                    row = a;
                    colIdx = j;
                }
            }
        }
        // dC_xy = [x == row] B(y, col) + [y == row] B(x, col)
        auto dc = [&](std::size_t x, std::size_t y) {
            return (x == row ? hp.taskFactor(y, colIdx) : 0.0) + (y == row ? hp.taskFactor(x, colIdx) : 0.0);
        };
        double djitter = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            djitter += dc(kernel.points[i].task, kernel.points[i].task);
        }
        djitter *= kRelativeJitter / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double dt = kernel.points[i].time - kernel.points[j].time;
                d(i, j) = dc(kernel.points[i].task, kernel.points[j].task) * temporal(dt, hp.lengthscale);
            }
            d(i, i) += djitter;
        }
    } else if (coordinate < base + m) {
        const std::size_t a = coordinate - base;
        for (std::size_t i = 0; i < n; ++i) {
            if (kernel.points[i].task == a) {
                d(i, i) = hp.noiseVariances[a] - MgpHyperparameters::kNoiseFloor;
            }
        }
    } else {
        const double t2 = hp.lengthscale * hp.lengthscale;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double dt = kernel.points[i].time - kernel.points[j].time;
                d(i, j) = kernel.kernel(i, j) * dt * dt / t2;
            }
        }
    }
    return d;
}

NllResult nll_and_gradient(const AssembledKernel& kernel, std::span<const double> y, const MgpHyperparameters& hp,
                           const SolverOptions& options)
{
    require(y.size() == kernel.size(), ErrorKind::DimensionMismatch, "nll: y length differs from kernel size");
    return guard_solver([&] {
        return options.method == SolveMethod::Dense ? dense_nll(kernel, y, hp) : mpcg_nll(kernel, y, hp, options);
    });
}

NllResult nll_and_gradient(const LongitudinalRecord& record, const MgpHyperparameters& hp,
                           const SolverOptions& options)
{
    const auto& cells = record.observed();
    const AssembledKernel kernel = assemble_covariance(record, hp, cells);
    const std::vector<double> y = gather(record, cells);
    try {
        return nll_and_gradient(kernel, y, hp, options);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::SolverBreakdown) {
            throw Error(ErrorKind::SolverBreakdown, "record " + record.id() + ": " + e.what());
        }
        throw;
    }
}

FitResult fit_hyperparameters(std::span<const LongitudinalRecord> pool, const MgpHyperparameters& init,
                              const FitOptions& options)
{
    init.validate();
    const std::size_t m = init.tasks();
    const std::size_t q = init.rank();
    std::size_t usable = 0;
    for (const auto& r : pool) {
        require(r.variables() == m, ErrorKind::DimensionMismatch, "fit: record " + r.id() + " has wrong M");
        usable += r.observed().empty() ? 0 : 1;
    }
    require(usable > 0, ErrorKind::EmptyObservationSet, "fit: pool has no observed values");

    MgpHyperparameters start = init;
    if (options.independentTasks) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < q; ++j) {
                if (i != j) {
                    start.taskFactor(i, j) = 0.0;
                }
            }
        }
    }

    FitResult result{start, {}, 0};
    std::vector<double> raw = start.to_unconstrained();
    AdamState adam(raw.size());
    std::vector<double> grad(raw.size());

    for (std::size_t it = 0; it < options.maxIterations; ++it) {
        const MgpHyperparameters hp = MgpHyperparameters::from_unconstrained(raw, m, q);
        double total = 0.0;
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t r = 0; r < pool.size(); ++r) {
            if (pool[r].observed().empty()) {
                continue;
            }
            SolverOptions solver = options.solver;
            solver.seed = options.solver.seed + r;
            const NllResult part = nll_and_gradient(pool[r], hp, solver);
            total += part.nll;
            for (std::size_t k = 0; k < grad.size(); ++k) {
                grad[k] += part.gradient[k];
            }
        }
        if (!std::isfinite(total)) {
            throw Error(ErrorKind::DivergenceDetected, "fit: NLL became non-finite at iteration " + std::to_string(it));
        }
        result.nllTrace.push_back(total);
        if (options.independentTasks) {
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j <= std::min(i, q - 1); ++j) {
                    if (i != j) {
                        grad[MgpHyperparameters::factor_slot(i, j, q)] = 0.0;
                    }
                }
            }
        }
        double norm = 0.0;
        for (double g : grad) {
            norm += g * g;
        }
        if (std::sqrt(norm) < options.gradientTolerance) {
            break;
        }
        adam.step(raw, grad, options.adam);
        ++result.iterations;
    }
    if (result.iterations > 0) {
        result.hyperparameters = MgpHyperparameters::from_unconstrained(raw, m, q);
    }
    return result;
}

Dataset pooled_subsample(const Dataset& dataset, std::size_t count)
{
    if (dataset.size() <= count) {
        return dataset;
    }
    Dataset out;
    out.reserve(count);
    const std::size_t stride = dataset.size() / count;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(dataset[i * stride]);
    }
    return out;
}

double median_pairwise_gap(std::span<const LongitudinalRecord> records)
{
    std::vector<double> gaps;
    for (const auto& r : records) {
        const auto& t = r.times();
        for (std::size_t i = 0; i < t.size(); ++i) {
            for (std::size_t j = i + 1; j < t.size(); ++j) {
                gaps.push_back(t[j] - t[i]);
            }
        }
    }
    if (gaps.empty()) {
        return 1.0;
    }
    const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    return *mid;
}

} // namespace muse::mgp
