#include "choreo/matrix.hpp"

#include "choreo/errors.hpp"

#include <algorithm>
#include <utility>

namespace choreo {

Matrix::Matrix(std::size_t rows, std::size_t cols, int digits)
    : rows_(rows), cols_(cols), digits_(digits), data_(rows * cols, Real(bits_for_digits(digits))) {}

Matrix Matrix::identity(std::size_t n, int digits) {
    Matrix m(n, n, digits);
    for (std::size_t i = 0; i < n; ++i) mpfr_set_ui(m(i, i).get(), 1, MPFR_RNDN);
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_, digits_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    }
    return t;
}

Matrix Matrix::at_digits(int digits) const {
    Matrix out(rows_, cols_, digits);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i].at_digits(digits);
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw PreconditionError("matrix shape mismatch");
    Matrix out(a.rows(), b.cols(), std::max(a.digits(), b.digits()));
    Real t(bits_for_digits(out.digits()));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            Real& acc = out(i, j);
            for (std::size_t k = 0; k < a.cols(); ++k) {
                mpfr_mul(t.get(), a(i, k).get(), b(k, j).get(), MPFR_RNDN);
                mpfr_add(acc.get(), acc.get(), t.get(), MPFR_RNDN);
            }
        }
    }
    return out;
}

std::vector<Real> operator*(const Matrix& a, const std::vector<Real>& x) {
    if (a.cols() != x.size()) throw PreconditionError("matrix-vector shape mismatch");
    std::vector<Real> out(a.rows(), Real(bits_for_digits(a.digits())));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) out[i] += a(i, k) * x[k];
    }
    return out;
}

Real determinant(const Matrix& a) {
    if (a.rows() != a.cols()) throw PreconditionError("determinant of a non-square matrix");
    const std::size_t n = a.rows();
    Matrix lu = a;
    Real det(1L, a.digits());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r) {
            if (abs(lu(r, k)) > abs(lu(piv, k))) piv = r;
        }
        if (lu(piv, k).is_zero()) return Real(bits_for_digits(a.digits()));
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(lu(k, c), lu(piv, c));
            det = -det;
        }
        det *= lu(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            const Real f = lu(r, k) / lu(k, k);
            for (std::size_t c = k + 1; c < n; ++c) lu(r, c) -= f * lu(k, c);
        }
    }
    return det;
}

Real max_abs(const Matrix& a) {
    Real m(bits_for_digits(a.digits()));
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) m = max(m, abs(a(r, c)));
    }
    return m;
}

}  // namespace choreo
