#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <type_traits>
#include <vector>

#include "cvsim/errors.hpp"

namespace cvsim {

using Complex = std::complex<double>;

/// Fixed-capacity dense matrix for the small systems handled here
/// (covariance matrices, drift matrices, channel blocks; dimension <= 16).
/// Value semantics, row-major storage, dimensions checked in debug builds.
template <typename T>
class Mat {
public:
    static constexpr int kMaxDim = 16;

    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols) {
        assert(rows >= 0 && cols >= 0 && rows <= kMaxDim && cols <= kMaxDim);
        data_.fill(T{});
    }
    Mat(int rows, int cols, std::initializer_list<T> vals) : Mat(rows, cols) {
        assert(static_cast<int>(vals.size()) == rows * cols);
        int k = 0;
        for (const T& v : vals) data_[k++] = v;
    }

    static Mat zero(int rows, int cols) { return Mat(rows, cols); }
    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }
    static Mat diag(const std::vector<T>& d) {
        Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (int i = 0; i < m.rows_; ++i) m(i, i) = d[static_cast<size_t>(i)];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    T& operator()(int i, int j) {
        assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
        return data_[static_cast<size_t>(i * cols_ + j)];
    }
    const T& operator()(int i, int j) const {
        assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
        return data_[static_cast<size_t>(i * cols_ + j)];
    }

    Mat transpose() const {
        Mat r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    Mat block(int i0, int j0, int r, int c) const {
        assert(i0 + r <= rows_ && j0 + c <= cols_);
        Mat b(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) b(i, j) = (*this)(i0 + i, j0 + j);
        return b;
    }
    void set_block(int i0, int j0, const Mat& b) {
        assert(i0 + b.rows_ <= rows_ && j0 + b.cols_ <= cols_);
        for (int i = 0; i < b.rows_; ++i)
            for (int j = 0; j < b.cols_; ++j) (*this)(i0 + i, j0 + j) = b(i, j);
    }

    Mat& operator+=(const Mat& o) {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        for (int k = 0; k < rows_ * cols_; ++k) data_[static_cast<size_t>(k)] += o.data_[static_cast<size_t>(k)];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        for (int k = 0; k < rows_ * cols_; ++k) data_[static_cast<size_t>(k)] -= o.data_[static_cast<size_t>(k)];
        return *this;
    }
    Mat& operator*=(const T& s) {
        for (int k = 0; k < rows_ * cols_; ++k) data_[static_cast<size_t>(k)] *= s;
        return *this;
    }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(Mat a, const T& s) { return a *= s; }
    friend Mat operator*(const T& s, Mat a) { return a *= s; }
    friend Mat operator-(Mat a) { return a *= T{-1}; }

    friend Mat operator*(const Mat& a, const Mat& b) {
        assert(a.cols_ == b.rows_);
        Mat r(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                if (aik == T{}) continue;
                for (int j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

    T trace() const {
        assert(rows_ == cols_);
        T t{};
        for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0;
        for (int k = 0; k < rows_ * cols_; ++k) m = std::max(m, std::abs(data_[static_cast<size_t>(k)]));
        return m;
    }
    double frobenius() const {
        double s = 0;
        for (int k = 0; k < rows_ * cols_; ++k) {
            double a = std::abs(data_[static_cast<size_t>(k)]);
            s += a * a;
        }
        return std::sqrt(s);
    }

private:
    int rows_ = 0, cols_ = 0;
    std::array<T, kMaxDim * kMaxDim> data_{};
};

using RMat = Mat<double>;
using CMat = Mat<Complex>;

inline CMat to_complex(const RMat& m) {
    CMat c(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) c(i, j) = Complex(m(i, j), 0.0);
    return c;
}
inline RMat real_part(const CMat& m) {
    RMat r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).real();
    return r;
}
inline RMat imag_part(const CMat& m) {
    RMat r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).imag();
    return r;
}
inline CMat adjoint(const CMat& m) {
    CMat a(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) a(j, i) = std::conj(m(i, j));
    return a;
}

/// In-place LU factorization with partial pivoting on a square matrix held in
/// a flat buffer. Returns the permutation sign; throws SingularSystem when a
/// pivot collapses below eps relative to the matrix scale.
template <typename T>
int lu_factor(std::vector<T>& a, int n, std::vector<int>& piv, double eps = 1e-14) {
    piv.resize(static_cast<size_t>(n));
    double scale = 0;
    for (const T& v : a) scale = std::max(scale, std::abs(v));
    if (scale == 0) throw SingularSystem("lu_factor: zero matrix");
    int sign = 1;
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(a[static_cast<size_t>(k * n + k)]);
        for (int i = k + 1; i < n; ++i) {
            double v = std::abs(a[static_cast<size_t>(i * n + k)]);
            if (v > best) { best = v; p = i; }
        }
        if (best <= eps * scale) throw SingularSystem("lu_factor: singular pivot");
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(a[static_cast<size_t>(k * n + j)], a[static_cast<size_t>(p * n + j)]);
            sign = -sign;
        }
        piv[static_cast<size_t>(k)] = p;
        const T pivot = a[static_cast<size_t>(k * n + k)];
        for (int i = k + 1; i < n; ++i) {
            T f = a[static_cast<size_t>(i * n + k)] / pivot;
            a[static_cast<size_t>(i * n + k)] = f;
            if (f == T{}) continue;
            for (int j = k + 1; j < n; ++j) a[static_cast<size_t>(i * n + j)] -= f * a[static_cast<size_t>(k * n + j)];
        }
    }
    return sign;
}

template <typename T>
void lu_solve_inplace(const std::vector<T>& lu, int n, const std::vector<int>& piv, std::vector<T>& b) {
    // row interchanges first (the factor rows were swapped wholesale), then
    // clean forward and backward substitution
    for (int k = 0; k < n; ++k)
        if (piv[static_cast<size_t>(k)] != k)
            std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(piv[static_cast<size_t>(k)])]);
    for (int k = 0; k < n; ++k)
        for (int i = k + 1; i < n; ++i) b[static_cast<size_t>(i)] -= lu[static_cast<size_t>(i * n + k)] * b[static_cast<size_t>(k)];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) b[static_cast<size_t>(i)] -= lu[static_cast<size_t>(i * n + j)] * b[static_cast<size_t>(j)];
        b[static_cast<size_t>(i)] /= lu[static_cast<size_t>(i * n + i)];
    }
}

/// Solve A X = B for small dense A.
template <typename T>
Mat<T> solve(const Mat<T>& A, const Mat<T>& B) {
    assert(A.rows() == A.cols() && A.rows() == B.rows());
    const int n = A.rows();
    std::vector<T> lu(static_cast<size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lu[static_cast<size_t>(i * n + j)] = A(i, j);
    std::vector<int> piv;
    lu_factor(lu, n, piv);
    Mat<T> X(n, B.cols());
    std::vector<T> col(static_cast<size_t>(n));
    for (int j = 0; j < B.cols(); ++j) {
        for (int i = 0; i < n; ++i) col[static_cast<size_t>(i)] = B(i, j);
        lu_solve_inplace(lu, n, piv, col);
        for (int i = 0; i < n; ++i) X(i, j) = col[static_cast<size_t>(i)];
    }
    return X;
}

template <typename T>
Mat<T> inverse(const Mat<T>& A) {
    return solve(A, Mat<T>::identity(A.rows()));
}

template <typename T>
T determinant(const Mat<T>& A) {
    assert(A.rows() == A.cols());
    const int n = A.rows();
    if (n == 0) return T{1};
    if (n == 1) return A(0, 0);
    if (n == 2) return A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    std::vector<T> lu(static_cast<size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lu[static_cast<size_t>(i * n + j)] = A(i, j);
    std::vector<int> piv;
    int sign;
    try {
        sign = lu_factor(lu, n, piv);
    } catch (const SingularSystem&) {
        return T{};
    }
    T det = static_cast<T>(sign);
    for (int i = 0; i < n; ++i) det *= lu[static_cast<size_t>(i * n + i)];
    return det;
}

} // namespace cvsim
