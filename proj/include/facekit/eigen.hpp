#pragma once

// Symmetric eigendecomposition (cyclic Jacobi) and the ridge-stabilized
// generalized eigenproblem solved by Cholesky whitening. Matrices in this
// library top out around 128x128, where Jacobi is accurate and fast enough.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "facekit/error.hpp"
#include "facekit/matrix.hpp"

namespace facekit {

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // sorted non-increasing
    Matrix eigenvectors;              // column k pairs with eigenvalues[k]
};

inline constexpr double kDefaultEigenTol = 1e-10;
inline constexpr int kJacobiSweepBudget = 100;

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) sum += a(i, j) * a(i, j);
    return std::sqrt(2.0 * sum);
}

// Flips each column so its largest-magnitude entry is positive. Keeps
// eigenvector signs stable across runs and platforms.
inline void normalize_column_signs(Matrix& vectors) {
    for (std::size_t j = 0; j < vectors.cols(); ++j) {
        std::size_t pivot = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < vectors.rows(); ++i) {
            const double mag = std::abs(vectors(i, j));
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        if (vectors(pivot, j) < 0.0)
            for (std::size_t i = 0; i < vectors.rows(); ++i)
                vectors(i, j) = -vectors(i, j);
    }
}

inline void sort_descending(EigenDecomposition& ed) {
    const std::size_t n = ed.eigenvalues.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ed.eigenvalues[a] > ed.eigenvalues[b];
    });
    std::vector<double> values(n);
    Matrix vectors(ed.eigenvectors.rows(), n);
    for (std::size_t k = 0; k < n; ++k) {
        values[k] = ed.eigenvalues[order[k]];
        for (std::size_t i = 0; i < vectors.rows(); ++i)
            vectors(i, k) = ed.eigenvectors(i, order[k]);
    }
    ed.eigenvalues = std::move(values);
    ed.eigenvectors = std::move(vectors);
}

}  // namespace detail

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Converges when the off-diagonal Frobenius mass drops to `tol`; a floor of
// 1e-14 * max(1, ||a||_F) accounts for the rounding noise that keeps large
// matrices from ever reaching a small absolute threshold.
inline EigenDecomposition sym_eigen(const Matrix& a, double tol = kDefaultEigenTol) {
    require(a.rows() == a.cols(), errc::non_square, "sym_eigen needs a square matrix");
    require(a.asymmetry() <= 1e-9, errc::asymmetric,
            "sym_eigen needs a symmetric matrix");

    const std::size_t n = a.rows();
    Matrix b = a;
    // Work on the exactly symmetric average; the input may carry ~1e-9 skew.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (b(i, j) + b(j, i));
            b(i, j) = m;
            b(j, i) = m;
        }
    Matrix v = Matrix::identity(n);

    const double norm = std::max(1.0, b.frobenius_norm());
    const double target = std::max(tol, 1e-14 * norm);

    bool converged = detail::off_diagonal_norm(b) <= target;
    for (int sweep = 0; sweep < kJacobiSweepBudget && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double bpq = b(p, q);
                if (bpq == 0.0) continue;
                const double theta = (b(q, q) - b(p, p)) / (2.0 * bpq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double bpp = b(p, p);
                const double bqq = b(q, q);
                b(p, p) = bpp - t * bpq;
                b(q, q) = bqq + t * bpq;
                b(p, q) = 0.0;
                b(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double brp = b(r, p);
                        const double brq = b(r, q);
                        b(r, p) = brp - s * (brq + tau * brp);
                        b(p, r) = b(r, p);
                        b(r, q) = brq + s * (brp - tau * brq);
                        b(q, r) = b(r, q);
                    }
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        converged = detail::off_diagonal_norm(b) <= target;
    }
    require(converged, errc::no_convergence, "Jacobi sweep budget exhausted");

    EigenDecomposition ed;
    ed.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) ed.eigenvalues[i] = b(i, i);
    ed.eigenvectors = std::move(v);
    detail::sort_descending(ed);
    detail::normalize_column_signs(ed.eigenvectors);
    return ed;
}

// Lower Cholesky factor of a symmetric positive definite matrix.
inline Matrix cholesky_lower(const Matrix& a) {
    require(a.rows() == a.cols(), errc::non_square, "cholesky needs a square matrix");
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        require(diag > 0.0, errc::singular_after_ridge,
                "matrix not positive definite");
        l(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double sum = a(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            l(i, j) = sum / l(j, j);
        }
    }
    return l;
}

namespace detail {

// Solves L * X = B in place of a copy of B (forward substitution, columnwise).
inline Matrix forward_solve(const Matrix& l, const Matrix& b) {
    Matrix x = b;
    const std::size_t n = l.rows();
    for (std::size_t col = 0; col < x.cols(); ++col)
        for (std::size_t i = 0; i < n; ++i) {
            double sum = x(i, col);
            for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * x(k, col);
            x(i, col) = sum / l(i, i);
        }
    return x;
}

// Solves L^T * x = b for a single vector (back substitution).
inline std::vector<double> back_solve_transposed(const Matrix& l,
                                                 std::span<const double> b) {
    const std::size_t n = l.rows();
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t ii = n; ii-- > 0;) {
        double sum = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) sum -= l(k, ii) * x[k];
        x[ii] = sum / l(ii, ii);
    }
    return x;
}

}  // namespace detail

// Suggested ridge for whitening: 1e-6 * tr(S_w) / n.
inline double default_ridge(const Matrix& s_w) {
    return 1e-6 * s_w.trace() / static_cast<double>(s_w.rows());
}

// Generalized eigenproblem S_b v = lambda (S_w + ridge I) v, solved by
// whitening: factor S_w + ridge I = L L^T, run sym_eigen on L^-1 S_b L^-T,
// and map eigenvectors back through L^-T. Eigenvalues come out real and
// non-negative for PSD S_b; eigenvectors are unit-norm but in general not
// mutually orthogonal.
inline EigenDecomposition whitened_gen_eigen(const Matrix& s_b, const Matrix& s_w,
                                             double ridge,
                                             double tol = kDefaultEigenTol) {
    require(s_b.rows() == s_b.cols() && s_w.rows() == s_w.cols() &&
                s_b.rows() == s_w.rows(),
            errc::dimension_mismatch, "scatter matrices must be square and equal-sized");
    require(s_b.asymmetry() <= 1e-9 && s_w.asymmetry() <= 1e-9, errc::asymmetric,
            "scatter matrices must be symmetric");
    require(ridge >= 0.0, errc::bad_argument, "ridge must be non-negative");

    const std::size_t n = s_w.rows();
    Matrix shifted = s_w;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) += ridge;

    const Matrix l = cholesky_lower(shifted);

    // C = L^-1 S_b L^-T, symmetrized against accumulated rounding skew.
    const Matrix y = detail::forward_solve(l, s_b);
    Matrix c = detail::forward_solve(l, y.transpose());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (c(i, j) + c(j, i));
            c(i, j) = m;
            c(j, i) = m;
        }

    EigenDecomposition whitened = sym_eigen(c, tol);

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = std::max(whitened.eigenvalues[k], 0.0);
        std::vector<double> u(n);
        for (std::size_t i = 0; i < n; ++i) u[i] = whitened.eigenvectors(i, k);
        std::vector<double> v = detail::back_solve_transposed(l, u);
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        require(norm > 0.0, errc::degenerate_data, "whitened eigenvector collapsed");
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v[i] / norm;
    }
    detail::normalize_column_signs(out.eigenvectors);
    return out;
}

}  // namespace facekit
