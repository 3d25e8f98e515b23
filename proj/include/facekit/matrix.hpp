#pragma once

// Dense real matrix with row-major storage. Small and simple on purpose:
// every image, covariance, scatter and feature block in this library is a
// plain Matrix of doubles.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "facekit/error.hpp"

namespace facekit {

class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), entries_(rows * cols, fill) {
        require(rows >= 1 && cols >= 1, errc::bad_argument,
                "matrix dimensions must be at least 1x1");
    }

    // Takes ownership of a row-major entry buffer. Rejects NaN/Inf so that
    // non-finite values never enter downstream arithmetic.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)) {
        require(rows >= 1 && cols >= 1, errc::bad_argument,
                "matrix dimensions must be at least 1x1");
        require(entries_.size() == rows * cols, errc::dimension_mismatch,
                "entry count does not match rows*cols");
        for (double v : entries_)
            require(std::isfinite(v), errc::not_finite,
                    "matrix entries must be finite");
    }

    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> init)
        : Matrix(rows, cols, std::vector<double>(init)) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return entries_.size(); }

    double& operator()(std::size_t i, std::size_t j) {
        return entries_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        return entries_[i * cols_ + j];
    }

    std::span<double> data() noexcept { return entries_; }
    std::span<const double> data() const noexcept { return entries_; }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix& operator+=(const Matrix& other) {
        require(same_shape(other), errc::dimension_mismatch, "shape mismatch in +");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            entries_[i] += other.entries_[i];
        return *this;
    }

    Matrix& operator-=(const Matrix& other) {
        require(same_shape(other), errc::dimension_mismatch, "shape mismatch in -");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            entries_[i] -= other.entries_[i];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& v : entries_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        require(a.cols_ == b.rows_, errc::dimension_mismatch,
                "inner dimensions do not match in matrix product");
        Matrix c(a.rows_, b.cols_);
        // i-k-j order keeps all three operands on row-major streaks.
        for (std::size_t i = 0; i < a.rows_; ++i) {
            const double* arow = &a.entries_[i * a.cols_];
            double* crow = &c.entries_[i * b.cols_];
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = arow[k];
                if (aik == 0.0) continue;
                const double* brow = &b.entries_[k * b.cols_];
                for (std::size_t j = 0; j < b.cols_; ++j) crow[j] += aik * brow[j];
            }
        }
        return c;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
    }

    double frobenius_norm() const {
        double sum = 0.0;
        for (double v : entries_) sum += v * v;
        return std::sqrt(sum);
    }

    double trace() const {
        require(rows_ == cols_, errc::non_square, "trace of non-square matrix");
        double t = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : entries_) m = std::max(m, std::abs(v));
        return m;
    }

    // Relative asymmetry: max |a_ij - a_ji| / max(1, max |a_ij|).
    double asymmetry() const {
        if (rows_ != cols_) return 1.0;
        double worst = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
        return worst / std::max(1.0, max_abs());
    }

    bool is_symmetric(double rel_tol = 1e-9) const {
        return rows_ == cols_ && asymmetry() <= rel_tol;
    }

    Matrix column(std::size_t j) const {
        require(j < cols_, errc::index_out_of_range, "column index out of range");
        Matrix c(rows_, 1);
        for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
        return c;
    }

    // Columns of `*this` selected by `indices`, in the given order.
    Matrix select_columns(std::span<const int> indices) const {
        require(!indices.empty(), errc::bad_argument, "no columns selected");
        Matrix out(rows_, indices.size());
        for (std::size_t j = 0; j < indices.size(); ++j) {
            const int src = indices[j];
            require(src >= 0 && static_cast<std::size_t>(src) < cols_,
                    errc::index_out_of_range, "column index out of range");
            for (std::size_t i = 0; i < rows_; ++i)
                out(i, j) = (*this)(i, static_cast<std::size_t>(src));
        }
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> entries_;
};

// Images are ordinary matrices; the alias marks intent at call sites.
using ImageMatrix = Matrix;

}  // namespace facekit
