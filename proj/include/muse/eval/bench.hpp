// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace muse::eval {

struct BenchRow {
    std::size_t size = 0;
    double choleskySeconds = 0.0;
    double mpcgSeconds = 0.0;
    double relativeError = 0.0;
    std::size_t iterations = 0;
};

struct BenchOptions {
    std::size_t repetitions = 3;
    std::size_t preconditionerRank = 10;
    std::size_t maxIterations = 100;
    double tolerance = 1e-10;
    std::uint64_t seed = 0;
};

/// Times a dense Cholesky solve against the preconditioned iterative solve on an
/// MGP kernel of each size (median over repetitions) and reports the iterative
/// solution's relative error. Error columns depend only on the seed.
std::vector<BenchRow> bench_solver(const std::vector<std::size_t>& sizes, const BenchOptions& options = {});

} // namespace muse::eval
