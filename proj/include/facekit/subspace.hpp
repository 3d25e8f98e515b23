#pragma once

// Scatter/covariance estimation and the six projection variants:
// {right, left, bilateral} x {PCA, LDA}. Bases always keep the full
// eigenvector spectrum; truncation to d components and random index
// sampling are the consumers' concern.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facekit/dataset.hpp"
#include "facekit/eigen.hpp"
#include "facekit/error.hpp"
#include "facekit/matrix.hpp"

namespace facekit {

enum class Family { pca, lda };
enum class Scheme { right, left, bilateral };

inline const char* family_name(Family f) { return f == Family::pca ? "pca" : "lda"; }
inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::right: return "right";
        case Scheme::left: return "left";
        default: return "bilateral";
    }
}

// Conventional display name, e.g. R2DLDA, B2DPCA.
inline std::string method_name(Family f, Scheme s) {
    std::string name(1, s == Scheme::right ? 'R' : s == Scheme::left ? 'L' : 'B');
    name += "2D";
    name += f == Family::pca ? "PCA" : "LDA";
    return name;
}

struct MethodSpec {
    Family family = Family::pca;
    Scheme scheme = Scheme::right;
    int d = 1;    // retained eigenvectors (right or left scheme)
    int d1 = 1;   // bilateral: retained left eigenvectors
    int d2 = 1;   // bilateral: retained right eigenvectors

    bool uses_right() const { return scheme != Scheme::left; }
    bool uses_left() const { return scheme != Scheme::right; }
};

// One side of a fitted basis: the full eigenvector spectrum, descending.
struct SideBasis {
    std::vector<double> eigenvalues;
    Matrix vectors;  // dim x spectrum, column k pairs with eigenvalues[k]

    int spectrum() const { return static_cast<int>(eigenvalues.size()); }
};

// Count of trailing near-zero eigenpairs (lambda < 1e-12 * lambda_max).
inline int negligible_eigenpair_count(const SideBasis& side) {
    if (side.eigenvalues.empty()) return 0;
    const double cutoff = 1e-12 * std::max(side.eigenvalues.front(), 0.0);
    int count = 0;
    for (double v : side.eigenvalues)
        if (v < cutoff) ++count;
    return count;
}

struct ProjectionBasis {
    MethodSpec spec;
    std::optional<SideBasis> right;  // V (PCA) / X (LDA), n x n
    std::optional<SideBasis> left;   // U (PCA) / Z (LDA), m x m
};

struct FeatureMatrix {
    Matrix values;
    MethodSpec spec;
    std::vector<int> left_indices;   // empty unless scheme uses the left side
    std::vector<int> right_indices;  // empty unless scheme uses the right side
};

// ---------------------------------------------------------------------------
// scatter / covariance estimation

inline ImageMatrix mean_image(const LabeledDataset& ds, std::span<const int> subset) {
    require(!subset.empty(), errc::empty_subset, "mean over empty subset");
    Matrix acc(ds.image_rows(), ds.image_cols());
    for (int idx : subset) {
        require(idx >= 0 && static_cast<std::size_t>(idx) < ds.size(),
                errc::index_out_of_range, "subset index out of range");
        acc += ds.images[static_cast<std::size_t>(idx)];
    }
    return acc * (1.0 / static_cast<double>(subset.size()));
}

namespace detail {

// Accumulates (1/M) sum_j D_j^T D_j (right) or (1/M) sum_j D_j D_j^T (left)
// where D_j runs over the given deviation matrices.
inline void accumulate_scatter(Matrix& acc, const Matrix& deviation, bool right,
                               double weight) {
    const std::size_t m = deviation.rows();
    const std::size_t n = deviation.cols();
    if (right) {
        // acc += w * D^T D, exploiting symmetry.
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b) {
                double sum = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    sum += deviation(i, a) * deviation(i, b);
                acc(a, b) += weight * sum;
                if (a != b) acc(b, a) += weight * sum;
            }
    } else {
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a; b < m; ++b) {
                double sum = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    sum += deviation(a, j) * deviation(b, j);
                acc(a, b) += weight * sum;
                if (a != b) acc(b, a) += weight * sum;
            }
    }
}

inline Matrix pca_cov(const LabeledDataset& ds, std::span<const int> train, bool right) {
    const ImageMatrix mean = mean_image(ds, train);
    const std::size_t dim = right ? ds.image_cols() : ds.image_rows();
    Matrix cov(dim, dim);
    const double inv_m = 1.0 / static_cast<double>(train.size());
    for (int idx : train) {
        const Matrix dev = ds.images[static_cast<std::size_t>(idx)] - mean;
        accumulate_scatter(cov, dev, right, inv_m);
    }
    return cov;
}

inline std::pair<Matrix, Matrix> lda_scatter(const LabeledDataset& ds,
                                             std::span<const int> train, bool right) {
    require(!train.empty(), errc::empty_subset, "scatter over empty subset");
    const std::size_t dim = right ? ds.image_cols() : ds.image_rows();
    const double inv_m = 1.0 / static_cast<double>(train.size());

    // Per-class member lists restricted to the training subset.
    std::vector<std::vector<int>> members(static_cast<std::size_t>(ds.class_count()));
    for (int idx : train) {
        require(idx >= 0 && static_cast<std::size_t>(idx) < ds.size(),
                errc::index_out_of_range, "subset index out of range");
        members[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(idx)])]
            .push_back(idx);
    }

    const ImageMatrix global_mean = mean_image(ds, train);
    Matrix s_b(dim, dim);
    Matrix s_w(dim, dim);
    for (const auto& class_members : members) {
        if (class_members.empty()) continue;
        const ImageMatrix class_mean = mean_image(ds, class_members);
        const Matrix between_dev = class_mean - global_mean;
        accumulate_scatter(s_b, between_dev, right,
                           inv_m * static_cast<double>(class_members.size()));
        for (int idx : class_members) {
            const Matrix within_dev = ds.images[static_cast<std::size_t>(idx)] - class_mean;
            accumulate_scatter(s_w, within_dev, right, inv_m);
        }
    }
    return {std::move(s_b), std::move(s_w)};
}

}  // namespace detail

// G_r = (1/M) sum_j (A_j - mean)^T (A_j - mean), n x n.
inline Matrix pca_right_cov(const LabeledDataset& ds, std::span<const int> train) {
    return detail::pca_cov(ds, train, true);
}

// G_l = (1/M) sum_j (A_j - mean) (A_j - mean)^T, m x m.
inline Matrix pca_left_cov(const LabeledDataset& ds, std::span<const int> train) {
    return detail::pca_cov(ds, train, false);
}

// (S_b, S_w) of right 2DLDA, both n x n: class means vs global mean weighted
// by class size, and within-class deviations, each scaled by 1/M.
inline std::pair<Matrix, Matrix> lda_scatter_right(const LabeledDataset& ds,
                                                   std::span<const int> train) {
    return detail::lda_scatter(ds, train, true);
}

inline std::pair<Matrix, Matrix> lda_scatter_left(const LabeledDataset& ds,
                                                  std::span<const int> train) {
    return detail::lda_scatter(ds, train, false);
}

// ---------------------------------------------------------------------------
// fitting

namespace detail {

inline SideBasis fit_pca_side(const LabeledDataset& ds, std::span<const int> train,
                              bool right) {
    const Matrix cov = pca_cov(ds, train, right);
    require(cov.max_abs() > 0.0, errc::degenerate_data,
            "zero covariance: all training images identical");
    EigenDecomposition ed = sym_eigen(cov);
    return SideBasis{std::move(ed.eigenvalues), std::move(ed.eigenvectors)};
}

inline SideBasis fit_lda_side(const LabeledDataset& ds, std::span<const int> train,
                              bool right) {
    auto [s_b, s_w] = lda_scatter(ds, train, right);
    require(s_b.max_abs() > 0.0, errc::degenerate_data,
            "zero between-class scatter");
    EigenDecomposition ed = whitened_gen_eigen(s_b, s_w, default_ridge(s_w));
    return SideBasis{std::move(ed.eigenvalues), std::move(ed.eigenvectors)};
}

}  // namespace detail

// Fits the full-spectrum basis for the method's scheme. PCA sides come from
// sym_eigen of the image covariance; LDA sides from the whitened generalized
// eigenproblem on the scatter pair.
inline ProjectionBasis fit_basis(const LabeledDataset& ds, std::span<const int> train,
                                 const MethodSpec& spec) {
    require(!train.empty(), errc::empty_subset, "fit over empty subset");
    if (spec.family == Family::lda) {
        int classes_present = 0;
        std::vector<char> seen(static_cast<std::size_t>(ds.class_count()), 0);
        for (int idx : train) {
            char& flag = seen[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(idx)])];
            if (!flag) {
                flag = 1;
                ++classes_present;
            }
        }
        require(classes_present >= 2, errc::degenerate_data,
                "LDA needs at least two classes in the training subset");
    } else {
        require(train.size() >= 2, errc::degenerate_data,
                "PCA needs at least two training images");
    }

    ProjectionBasis basis;
    basis.spec = spec;
    if (spec.uses_right())
        basis.right = spec.family == Family::pca
                          ? detail::fit_pca_side(ds, train, true)
                          : detail::fit_lda_side(ds, train, true);
    if (spec.uses_left())
        basis.left = spec.family == Family::pca
                         ? detail::fit_pca_side(ds, train, false)
                         : detail::fit_lda_side(ds, train, false);
    return basis;
}

// ---------------------------------------------------------------------------
// projection / reconstruction

namespace detail {

inline void check_indices(std::span<const int> indices, int spectrum) {
    require(!indices.empty(), errc::bad_argument, "no eigenvector indices given");
    std::vector<int> sorted(indices.begin(), indices.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        require(sorted[i] >= 0 && sorted[i] < spectrum, errc::index_out_of_range,
                "eigenvector index out of range");
        require(i == 0 || sorted[i] != sorted[i - 1], errc::duplicate_index,
                "duplicate eigenvector index");
    }
}

}  // namespace detail

// Projects one image onto the selected eigenvectors. Right: A * V_sel;
// Left: U_sel^T * A; Bilateral: U_sel^T * A * V_sel.
inline FeatureMatrix project(const ImageMatrix& img, const ProjectionBasis& basis,
                             std::span<const int> left_indices,
                             std::span<const int> right_indices) {
    FeatureMatrix feat;
    feat.spec = basis.spec;

    const bool wants_left = basis.spec.uses_left();
    const bool wants_right = basis.spec.uses_right();
    require(wants_left == !left_indices.empty() && wants_right == !right_indices.empty(),
            errc::bad_argument, "index sets do not match the projection scheme");

    Matrix projected = img;
    if (wants_left) {
        require(basis.left.has_value(), errc::bad_argument, "basis has no left side");
        detail::check_indices(left_indices, basis.left->spectrum());
        require(basis.left->vectors.rows() == img.rows(), errc::shape_mismatch,
                "image height does not match left basis");
        const Matrix u_sel = basis.left->vectors.select_columns(left_indices);
        projected = u_sel.transpose() * projected;
        feat.left_indices.assign(left_indices.begin(), left_indices.end());
    }
    if (wants_right) {
        require(basis.right.has_value(), errc::bad_argument, "basis has no right side");
        detail::check_indices(right_indices, basis.right->spectrum());
        require(basis.right->vectors.rows() == img.cols(), errc::shape_mismatch,
                "image width does not match right basis");
        const Matrix v_sel = basis.right->vectors.select_columns(right_indices);
        projected = projected * v_sel;
        feat.right_indices.assign(right_indices.begin(), right_indices.end());
    }
    feat.values = std::move(projected);
    return feat;
}

// Convenience: top-d eigenvectors per used side (d1/d2 for bilateral).
inline FeatureMatrix project_top(const ImageMatrix& img, const ProjectionBasis& basis) {
    const MethodSpec& spec = basis.spec;
    auto iota = [](int count) {
        std::vector<int> v(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = i;
        return v;
    };
    std::vector<int> left_idx, right_idx;
    if (spec.scheme == Scheme::bilateral) {
        left_idx = iota(spec.d1);
        right_idx = iota(spec.d2);
    } else if (spec.scheme == Scheme::left) {
        left_idx = iota(spec.d);
    } else {
        right_idx = iota(spec.d);
    }
    return project(img, basis, left_idx, right_idx);
}

// Approximate inverse of `project` for the orthonormal PCA bases:
// Right: Y * V_sel^T, Left: U_sel * Y. Exact when every eigenvector was kept.
// LDA and bilateral features are refused.
inline ImageMatrix reconstruct(const FeatureMatrix& feat, const ProjectionBasis& basis) {
    require(feat.spec.family == Family::pca, errc::unsupported_scheme,
            "reconstruction is defined for PCA features only");
    require(feat.spec.scheme != Scheme::bilateral, errc::unsupported_scheme,
            "bilateral reconstruction is not defined");
    if (feat.spec.scheme == Scheme::right) {
        require(basis.right.has_value(), errc::bad_argument, "basis has no right side");
        const Matrix v_sel = basis.right->vectors.select_columns(feat.right_indices);
        return feat.values * v_sel.transpose();
    }
    require(basis.left.has_value(), errc::bad_argument, "basis has no left side");
    const Matrix u_sel = basis.left->vectors.select_columns(feat.left_indices);
    return u_sel * feat.values;
}

// ---------------------------------------------------------------------------
// basis container (binary, little-endian, versioned magic)

namespace detail {

inline constexpr char kBasisMagic[8] = {'F', 'K', 'B', 'A', 'S', 'I', 'S', '\x01'};

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class ByteReader {
public:
    ByteReader(const std::string& bytes, const std::string& what)
        : bytes_(bytes), what_(what) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_++]))
                 << (8 * i);
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_++]))
                    << (8 * i);
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    void expect_magic() {
        need(sizeof kBasisMagic);
        for (char expected : kBasisMagic)
            require(bytes_[pos_++] == expected, errc::malformed_header,
                    "bad basis magic in " + what_);
    }

    bool exhausted() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) {
        require(bytes_.size() - pos_ >= n, errc::truncated_data,
                "truncated basis container: " + what_);
    }

    const std::string& bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

inline void put_side(std::string& out, const SideBasis& side) {
    put_u32(out, static_cast<std::uint32_t>(side.vectors.rows()));
    put_u32(out, static_cast<std::uint32_t>(side.spectrum()));
    for (double v : side.eigenvalues) put_f64(out, v);
    for (double v : side.vectors.data()) put_f64(out, v);
}

inline SideBasis read_side(ByteReader& in) {
    const std::uint32_t dim = in.u32();
    const std::uint32_t count = in.u32();
    require(dim >= 1 && count >= 1, errc::malformed_header, "empty basis side");
    SideBasis side;
    side.eigenvalues.resize(count);
    for (auto& v : side.eigenvalues) v = in.f64();
    std::vector<double> entries(static_cast<std::size_t>(dim) * count);
    for (auto& v : entries) v = in.f64();
    side.vectors = Matrix(dim, count, std::move(entries));
    return side;
}

}  // namespace detail

inline void save_basis(const std::filesystem::path& path, const ProjectionBasis& basis) {
    std::string out(detail::kBasisMagic, sizeof detail::kBasisMagic);
    out.push_back(static_cast<char>(basis.spec.family == Family::pca ? 0 : 1));
    out.push_back(static_cast<char>(basis.spec.scheme == Scheme::right ? 0
                                    : basis.spec.scheme == Scheme::left ? 1
                                                                        : 2));
    out.push_back(static_cast<char>(basis.left.has_value() ? 1 : 0));
    out.push_back(static_cast<char>(basis.right.has_value() ? 1 : 0));
    detail::put_u32(out, static_cast<std::uint32_t>(basis.spec.d));
    detail::put_u32(out, static_cast<std::uint32_t>(basis.spec.d1));
    detail::put_u32(out, static_cast<std::uint32_t>(basis.spec.d2));
    if (basis.left) detail::put_side(out, *basis.left);
    if (basis.right) detail::put_side(out, *basis.right);

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    require(file.good(), errc::io_error, "cannot open " + path.string() + " for write");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    require(file.good(), errc::io_error, "write failure on " + path.string());
}

inline ProjectionBasis load_basis(const std::filesystem::path& path) {
    const std::string bytes = detail::read_file_bytes(path);
    detail::ByteReader in(bytes, path.string());
    in.expect_magic();

    ProjectionBasis basis;
    const std::uint8_t family = in.u8();
    const std::uint8_t scheme = in.u8();
    require(family <= 1 && scheme <= 2, errc::malformed_header,
            "bad basis method fields");
    basis.spec.family = family == 0 ? Family::pca : Family::lda;
    basis.spec.scheme = scheme == 0 ? Scheme::right
                        : scheme == 1 ? Scheme::left
                                      : Scheme::bilateral;
    const bool has_left = in.u8() != 0;
    const bool has_right = in.u8() != 0;
    basis.spec.d = static_cast<int>(in.u32());
    basis.spec.d1 = static_cast<int>(in.u32());
    basis.spec.d2 = static_cast<int>(in.u32());
    if (has_left) basis.left = detail::read_side(in);
    if (has_right) basis.right = detail::read_side(in);
    require(in.exhausted(), errc::malformed_header,
            "trailing bytes in basis container: " + path.string());
    return basis;
}

}  // namespace facekit
