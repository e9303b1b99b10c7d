#pragma once

#include "choreo/real.hpp"

#include <cstddef>
#include <vector>

namespace choreo {

/// Dense row-major matrix of Reals at a common precision.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, int digits);

    static Matrix identity(std::size_t n, int digits);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    int digits() const { return digits_; }

    Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Real& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    Matrix transposed() const;
    Matrix at_digits(int digits) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    int digits_ = 0;
    std::vector<Real> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
std::vector<Real> operator*(const Matrix& a, const std::vector<Real>& x);

/// Determinant by LU factorisation with partial pivoting.
Real determinant(const Matrix& a);

/// Largest absolute entry.
Real max_abs(const Matrix& a);

}  // namespace choreo
