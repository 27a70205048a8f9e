// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/matrix.hpp"

#include <algorithm>

namespace muse {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size())
{
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        require(r.size() == cols_, ErrorKind::DimensionMismatch, "ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::column(std::span<const double> values)
{
    return {values.size(), 1, std::vector<double>(values.begin(), values.end())};
}

Matrix Matrix::diagonal(std::span<const double> values)
{
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        m(i, i) = values[i];
    }
    return m;
}

std::vector<double> Matrix::col(std::size_t j) const
{
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        out[i] = (*this)(i, j);
    }
    return out;
}

void Matrix::set_col(std::size_t j, std::span<const double> values)
{
    require(values.size() == rows_, ErrorKind::DimensionMismatch, "column length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) {
        (*this)(i, j) = values[i];
    }
}

Matrix Matrix::transpose() const
{
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            t(j, i) = (*this)(i, j);
        }
    }
    return t;
}

double Matrix::frobenius_norm() const noexcept
{
    return std::sqrt(kernels::dot(data_.data(), data_.data(), data_.size()));
}

bool Matrix::all_finite() const noexcept
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other)
{
    require(rows_ == other.rows_ && cols_ == other.cols_, ErrorKind::DimensionMismatch, "matrix +=");
    kernels::axpy(1.0, other.data(), data(), data_.size());
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other)
{
    require(rows_ == other.rows_ && cols_ == other.cols_, ErrorKind::DimensionMismatch, "matrix -=");
    kernels::axpy(-1.0, other.data(), data(), data_.size());
    return *this;
}

Matrix& Matrix::operator*=(double s) noexcept
{
    for (double& v : data_) {
        v *= s;
    }
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b)
{
    require(a.cols() == b.rows(), ErrorKind::DimensionMismatch, "matmul inner dimensions");
    Matrix c(a.rows(), b.cols());
    kernels::active().gemm(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols(), false);
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b)
{
    require(a.cols() == b.cols(), ErrorKind::DimensionMismatch, "matmul_nt inner dimensions");
    Matrix c(a.rows(), b.rows());
    kernels::active().gemm_nt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows(), false);
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b)
{
    require(a.rows() == b.rows(), ErrorKind::DimensionMismatch, "matmul_tn inner dimensions");
    Matrix c(a.cols(), b.cols());
    kernels::active().gemm_tn_acc(a.data(), b.data(), c.data(), a.cols(), a.rows(), b.cols());
    return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b)
{
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::DimensionMismatch, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

} // namespace muse
