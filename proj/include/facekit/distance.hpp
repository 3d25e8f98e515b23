#pragma once

// The two inter-feature distance metrics used for nearest-neighbor matching.

#include <algorithm>
#include <cmath>

#include "facekit/error.hpp"
#include "facekit/matrix.hpp"

namespace facekit {

enum class Metric { frobenius, cosine };

inline const char* metric_name(Metric m) {
    return m == Metric::frobenius ? "frobenius" : "cosine";
}

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), errc::dimension_mismatch,
            "frobenius_distance: shape mismatch");
    double sum = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = da[i] - db[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

// 1 - <vec(a), vec(b)> / (||vec(a)|| * ||vec(b)||), on the flattened
// matrices, clamped into [0, 2].
inline double cosine_distance(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), errc::dimension_mismatch,
            "cosine_distance: shape mismatch");
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        dot += da[i] * db[i];
        na2 += da[i] * da[i];
        nb2 += db[i] * db[i];
    }
    require(na2 > 0.0 && nb2 > 0.0, errc::zero_matrix,
            "cosine_distance: all-zero operand");
    const double d = 1.0 - dot / (std::sqrt(na2) * std::sqrt(nb2));
    return std::clamp(d, 0.0, 2.0);
}

inline double matrix_distance(const Matrix& a, const Matrix& b, Metric metric) {
    return metric == Metric::frobenius ? frobenius_distance(a, b)
                                       : cosine_distance(a, b);
}

}  // namespace facekit
