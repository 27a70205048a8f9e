// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/error.hpp"
#include "muse/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace muse {

/// Dense row-major matrix of doubles. Value semantics; a column vector is a
/// matrix with one column.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        require(data_.size() == rows_ * cols_, ErrorKind::DimensionMismatch,
                "matrix data length does not match its shape");
    }
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix column(std::span<const double> values);
    static Matrix diagonal(std::span<const double> values);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    [[nodiscard]] double* data() noexcept { return data_.data(); }
    [[nodiscard]] const double* data() const noexcept { return data_.data(); }
    [[nodiscard]] std::span<double> values() noexcept { return data_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return data_; }

    [[nodiscard]] std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept
    {
        return {data_.data() + i * cols_, cols_};
    }

    [[nodiscard]] std::vector<double> col(std::size_t j) const;
    void set_col(std::size_t j, std::span<const double> values);

    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] double frobenius_norm() const noexcept;
    [[nodiscard]] bool all_finite() const noexcept;

    void fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s) noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);

/// A * B through the dispatched gemm kernel.
Matrix matmul(const Matrix& a, const Matrix& b);
/// A * B^T.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// A^T * B.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// Largest |a_ij - b_ij|.
double max_abs_diff(const Matrix& a, const Matrix& b);

} // namespace muse
