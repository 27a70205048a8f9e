// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/matrix.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace muse {

/// (time step, variable) coordinate of one cell.
struct CellIndex {
    std::size_t time = 0;
    std::size_t variable = 0;

    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// One patient's irregular, partially observed multivariate series.
///
/// Missingness is carried by explicit index sets (and a bitmap for O(1)
/// lookup); missing cells hold 0 in `values()` but are never read as data.
class LongitudinalRecord {
public:
    LongitudinalRecord() = default;

    /// `observed` is row-major T x M, nonzero for observed cells.
    LongitudinalRecord(std::string id, int label, std::vector<double> times, Matrix values,
                       std::vector<std::uint8_t> observed);

    /// Builds from a nullable grid (nullopt marks a missing cell).
    static LongitudinalRecord from_cells(std::string id, int label, std::vector<double> times,
                                         const std::vector<std::vector<std::optional<double>>>& cells);

    /// Fully observed record.
    static LongitudinalRecord dense(std::string id, int label, std::vector<double> times, Matrix values);

    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] int label() const noexcept { return label_; }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] const Matrix& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t steps() const noexcept { return times_.size(); }
    [[nodiscard]] std::size_t variables() const noexcept { return values_.cols(); }

    [[nodiscard]] bool is_observed(std::size_t t, std::size_t m) const noexcept
    {
        return observedBits_[t * values_.cols() + m] != 0;
    }
    [[nodiscard]] std::optional<double> cell(std::size_t t, std::size_t m) const
    {
        return is_observed(t, m) ? std::optional<double>(values_(t, m)) : std::nullopt;
    }

    /// I_o and I_u, both in time-major order.
    [[nodiscard]] const std::vector<CellIndex>& observed() const noexcept { return observed_; }
    [[nodiscard]] const std::vector<CellIndex>& missing() const noexcept { return missing_; }

    /// T x M, 1 on missing cells.
    [[nodiscard]] Matrix missing_mask() const;

    /// Same record with one more cell hidden (used to hold out cells for scoring).
    [[nodiscard]] LongitudinalRecord with_hidden(const std::vector<CellIndex>& cells) const;

    friend bool operator==(const LongitudinalRecord&, const LongitudinalRecord&) = default;

private:
    std::string id_;
    int label_ = 0;
    std::vector<double> times_;
    Matrix values_;
    std::vector<std::uint8_t> observedBits_;
    std::vector<CellIndex> observed_;
    std::vector<CellIndex> missing_;
};

using Dataset = std::vector<LongitudinalRecord>;

/// Completed values plus the original missingness (1 on cells that were imputed).
struct ImputedRecord {
    std::string id;
    int label = 0;
    std::vector<double> times;
    Matrix imputed;
    Matrix mask;

    friend bool operator==(const ImputedRecord&, const ImputedRecord&) = default;
};

} // namespace muse
