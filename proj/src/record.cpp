// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/record.hpp"

#include <cmath>

namespace muse {

LongitudinalRecord::LongitudinalRecord(std::string id, int label, std::vector<double> times, Matrix values,
                                       std::vector<std::uint8_t> observed)
    : id_(std::move(id)), label_(label), times_(std::move(times)), values_(std::move(values)),
      observedBits_(std::move(observed))
{
    require(label_ == 0 || label_ == 1, ErrorKind::InvalidArgument, "record " + id_ + ": label must be 0 or 1");
    require(values_.rows() == times_.size(), ErrorKind::ShapeMismatch,
            "record " + id_ + ": values rows must match the number of times");
    require(observedBits_.size() == values_.size(), ErrorKind::ShapeMismatch,
            "record " + id_ + ": observation bitmap size");
    for (std::size_t i = 0; i < times_.size(); ++i) {
        require(std::isfinite(times_[i]), ErrorKind::NonFinite, "record " + id_ + ": non-finite time");
        require(i == 0 || times_[i] > times_[i - 1], ErrorKind::InvalidArgument,
                "record " + id_ + ": times must be strictly increasing");
    }
    const std::size_t m = values_.cols();
    for (std::size_t t = 0; t < times_.size(); ++t) {
        for (std::size_t v = 0; v < m; ++v) {
            if (observedBits_[t * m + v] != 0) {
                observedBits_[t * m + v] = 1;
                require(std::isfinite(values_(t, v)), ErrorKind::NonFinite,
                        "record " + id_ + ": observed cell is not finite");
                observed_.push_back({t, v});
            } else {
                values_(t, v) = 0.0;
                missing_.push_back({t, v});
            }
        }
    }
}

LongitudinalRecord LongitudinalRecord::from_cells(std::string id, int label, std::vector<double> times,
                                                  const std::vector<std::vector<std::optional<double>>>& cells)
{
    const std::size_t t = cells.size();
    const std::size_t m = t == 0 ? 0 : cells.front().size();
    Matrix values(t, m);
    std::vector<std::uint8_t> bits(t * m, 0);
    for (std::size_t i = 0; i < t; ++i) {
        require(cells[i].size() == m, ErrorKind::ShapeMismatch, "record " + id + ": ragged value rows");
        for (std::size_t j = 0; j < m; ++j) {
            if (cells[i][j]) {
                values(i, j) = *cells[i][j];
                bits[i * m + j] = 1;
            }
        }
    }
    return {std::move(id), label, std::move(times), std::move(values), std::move(bits)};
}

LongitudinalRecord LongitudinalRecord::dense(std::string id, int label, std::vector<double> times, Matrix values)
{
    std::vector<std::uint8_t> bits(values.size(), 1);
    return {std::move(id), label, std::move(times), std::move(values), std::move(bits)};
}

Matrix LongitudinalRecord::missing_mask() const
{
    Matrix mask(values_.rows(), values_.cols());
    for (const auto& c : missing_) {
        mask(c.time, c.variable) = 1.0;
    }
    return mask;
}

LongitudinalRecord LongitudinalRecord::with_hidden(const std::vector<CellIndex>& cells) const
{
    std::vector<std::uint8_t> bits = observedBits_;
    for (const auto& c : cells) {
        require(c.time < steps() && c.variable < variables(), ErrorKind::InvalidArgument,
                "record " + id_ + ": hidden cell out of range");
        bits[c.time * variables() + c.variable] = 0;
    }
    return {id_, label_, times_, values_, std::move(bits)};
}

} // namespace muse
