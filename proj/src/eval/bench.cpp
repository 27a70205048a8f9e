// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/eval/bench.hpp"

#include "muse/linalg/mpcg.hpp"
#include "muse/mgp/covariance.hpp"
#include "muse/synth/synth.hpp"

#include <algorithm>
#include <chrono>
#include <random>

namespace muse::eval {
namespace {

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

template <typename Fn>
double seconds(Fn&& fn)
{
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

std::vector<BenchRow> bench_solver(const std::vector<std::size_t>& sizes, const BenchOptions& options)
{
    require(options.repetitions >= 1, ErrorKind::InvalidArgument, "bench_solver: repetitions must be positive");
    std::vector<BenchRow> rows;
    for (std::size_t idx = 0; idx < sizes.size(); ++idx) {
        const std::size_t n = sizes[idx];
        require(n >= 32, ErrorKind::InvalidArgument, "bench_solver: sizes must be at least 32");
        std::mt19937_64 rng(synth::derive_seed(options.seed, n));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> normal;

        constexpr std::size_t tasks = 3;
        mgp::MgpHyperparameters hp = mgp::MgpHyperparameters::initial(tasks, tasks, 5.0, rng());
        for (std::size_t i = 0; i < tasks; ++i) {
            hp.noiseVariances[i] = 0.05 + 0.2 * unif(rng);
        }
        std::vector<mgp::ObservationPoint> points(n);
        for (std::size_t i = 0; i < n; ++i) {
            points[i] = {100.0 * unif(rng), i % tasks};
        }
        const auto kernel = mgp::assemble_covariance(points, hp);
        Matrix y(n, 1);
        for (double& v : y.values()) {
            v = normal(rng);
        }

        std::vector<double> cholTimes;
        std::vector<double> cgTimes;
        Matrix exact;
        linalg::MpcgResult iterative;
        for (std::size_t r = 0; r < options.repetitions; ++r) {
            cholTimes.push_back(seconds([&] { exact = linalg::cholesky_solve(linalg::DenseSymmetricMatrix(kernel.matrix), y); }));
            cgTimes.push_back(seconds([&] {
                const linalg::Preconditioner p(
                    linalg::pivoted_cholesky(linalg::DenseSymmetricMatrix(kernel.kernel),
                                             std::min(options.preconditionerRank, n)),
                    kernel.noise);
                linalg::SolverWorkspace ws{y, options.maxIterations, options.tolerance, {}};
                iterative = linalg::mpcg_batch(linalg::dense_operator(kernel.matrix), ws, p);
            }));
        }
        BenchRow row;
        row.size = n;
        row.choleskySeconds = median(cholTimes);
        row.mpcgSeconds = median(cgTimes);
        row.relativeError = (iterative.solution - exact).frobenius_norm() / exact.frobenius_norm();
        row.iterations = iterative.iterations.front();
        rows.push_back(row);
    }
    return rows;
}

} // namespace muse::eval
