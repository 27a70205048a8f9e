// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/mgp/covariance.hpp"

#include <cmath>
#include <random>

namespace muse::mgp {

std::vector<ObservationPoint> observation_points(const LongitudinalRecord& record, std::span<const CellIndex> cells)
{
    std::vector<ObservationPoint> points;
    points.reserve(cells.size());
    for (const auto& c : cells) {
        require(c.time < record.steps() && c.variable < record.variables(), ErrorKind::InvalidArgument,
                "record " + record.id() + ": cell out of range");
        points.push_back({record.times()[c.time], c.variable});
    }
    return points;
}

Matrix cross_covariance(std::span<const ObservationPoint> rows, std::span<const ObservationPoint> cols,
                        const MgpHyperparameters& hp)
{
    const Matrix c = hp.task_covariance();
    const double scale = -0.5 / (hp.lengthscale * hp.lengthscale);
    Matrix k(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].task < hp.tasks(), ErrorKind::DimensionMismatch, "covariance: task index exceeds M");
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const double dt = rows[i].time - cols[j].time;
            k(i, j) = c(rows[i].task, cols[j].task) * std::exp(scale * dt * dt);
        }
    }
    return k;
}

AssembledKernel assemble_covariance(std::span<const ObservationPoint> points, const MgpHyperparameters& hp)
{
    require(!points.empty(), ErrorKind::EmptyObservationSet, "covariance over an empty observation set");
    hp.validate();
    for (const auto& p : points) {
        require(p.task < hp.tasks(), ErrorKind::DimensionMismatch, "covariance: task index exceeds M");
    }
    const std::size_t n = points.size();
    AssembledKernel out;
    out.points.assign(points.begin(), points.end());
    out.kernel = cross_covariance(points, points, hp);
    // Exact symmetry regardless of rounding in exp.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            out.kernel(j, i) = out.kernel(i, j);
        }
    }
    double meanDiag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        meanDiag += out.kernel(i, i);
    }
    meanDiag /= static_cast<double>(n);
    out.jitter = kRelativeJitter * meanDiag;

    out.indicator = Matrix(n, hp.tasks());
    out.noise.resize(n);
    out.matrix = out.kernel;
    for (std::size_t i = 0; i < n; ++i) {
        out.indicator(i, points[i].task) = 1.0;
        out.noise[i] = hp.noiseVariances[points[i].task] + out.jitter;
        out.matrix(i, i) += out.noise[i];
    }
    return out;
}

AssembledKernel assemble_covariance(const LongitudinalRecord& record, const MgpHyperparameters& hp,
                                    std::span<const CellIndex> cells)
{
    require(!cells.empty(), ErrorKind::EmptyObservationSet, "record " + record.id() + ": no observations");
    require(record.variables() == hp.tasks(), ErrorKind::DimensionMismatch,
            "record " + record.id() + ": variable count differs from M");
    const auto points = observation_points(record, cells);
    return assemble_covariance(points, hp);
}

std::vector<double> gather(const LongitudinalRecord& record, std::span<const CellIndex> cells)
{
    std::vector<double> y;
    y.reserve(cells.size());
    for (const auto& c : cells) {
        require(record.is_observed(c.time, c.variable), ErrorKind::InvalidArgument,
                "record " + record.id() + ": gathering a missing cell");
        y.push_back(record.values()(c.time, c.variable));
    }
    return y;
}

Matrix sample_prior(std::span<const double> times, const MgpHyperparameters& hp, std::uint64_t seed)
{
    const std::size_t t = times.size();
    const std::size_t m = hp.tasks();
    std::vector<ObservationPoint> points;
    points.reserve(t * m);
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t v = 0; v < m; ++v) {
            points.push_back({times[i], v});
        }
    }
    const AssembledKernel k = assemble_covariance(points, hp);
    const linalg::CholeskyFactor chol(linalg::DenseSymmetricMatrix(k.matrix));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix z(t * m, 1);
    for (double& v : z.values()) {
        v = normal(rng);
    }
    const Matrix draw = matmul(chol.lower(), z);
    return Matrix(t, m, std::vector<double>(draw.values().begin(), draw.values().end()));
}

} // namespace muse::mgp
