#pragma once

// The random subspace ensemble: eigenvector index sampling, leave-one-out
// credibility scored by the adjusted Rand index, entropy diversity, ARI^b
// weighting, and the full train-predict pipeline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "facekit/classify.hpp"
#include "facekit/dataset.hpp"
#include "facekit/error.hpp"
#include "facekit/parallel.hpp"
#include "facekit/rng.hpp"
#include "facekit/subspace.hpp"

namespace facekit {

// ARI values at or below this floor are clamped before exponentiation so
// that w = ARI^b stays well-defined for non-integer b. If every classifier
// sits at the floor the ensemble falls back to uniform weights.
inline constexpr double kAriFloor = 1e-6;

struct ClassifierSpec {
    std::vector<int> left_indices;   // sorted, empty unless scheme uses left
    std::vector<int> right_indices;  // sorted, empty unless scheme uses right
    double ari = 0.0;
    double weight = 0.0;
};

struct EnsembleConfig {
    Family family = Family::lda;
    Scheme scheme = Scheme::right;
    int t = 50;          // classifier count
    int d = 5;           // eigenvectors sampled per classifier (per used side)
    KnnConfig knn{};
    double b = 2.0;      // ARI exponent
    std::uint64_t seed = 0;
};

struct ContingencyTable {
    std::size_t rows = 0;             // ground-truth clusters
    std::size_t cols = 0;             // predicted clusters
    std::vector<std::int64_t> counts;  // rows x cols, o_ij = |G_i n P_j|
    std::vector<std::int64_t> row_sums;
    std::vector<std::int64_t> col_sums;
    std::int64_t total = 0;

    std::int64_t at(std::size_t i, std::size_t j) const { return counts[i * cols + j]; }
};

struct DiversityReport {
    std::vector<int> zeta;  // per test image: classifiers that got it wrong
    int t = 0;
    double entropy = 0.0;
};

// ---------------------------------------------------------------------------
// building blocks

// d distinct eigenvector indices from [0, spectrum_size), sorted ascending.
inline std::vector<int> sample_subspace(int spectrum_size, int d, Rng& rng) {
    require(spectrum_size >= 1, errc::bad_argument, "empty spectrum");
    require(d >= 1 && d <= spectrum_size, errc::d_too_large,
            "d exceeds the eigenvector spectrum");
    std::vector<int> indices = rng.sample_without_replacement(spectrum_size, d);
    std::sort(indices.begin(), indices.end());
    return indices;
}

inline ContingencyTable contingency_table(std::span<const int> g,
                                          std::span<const int> p) {
    require(g.size() == p.size(), errc::length_mismatch,
            "labelings must have equal length");
    require(g.size() >= 2, errc::too_few_items, "need at least two items");

    // Labels are arbitrary; remap each side to dense cluster ids.
    std::map<int, std::size_t> g_ids, p_ids;
    for (int v : g) g_ids.try_emplace(v, g_ids.size());
    for (int v : p) p_ids.try_emplace(v, p_ids.size());

    ContingencyTable table;
    table.rows = g_ids.size();
    table.cols = p_ids.size();
    table.counts.assign(table.rows * table.cols, 0);
    table.row_sums.assign(table.rows, 0);
    table.col_sums.assign(table.cols, 0);
    table.total = static_cast<std::int64_t>(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t gi = g_ids.at(g[i]);
        const std::size_t pj = p_ids.at(p[i]);
        ++table.counts[gi * table.cols + pj];
        ++table.row_sums[gi];
        ++table.col_sums[pj];
    }
    return table;
}

namespace detail {

inline double comb2(std::int64_t n) {
    return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
}

// True iff the two labelings induce the same partition: every row and every
// column of the contingency table has exactly one nonzero block.
inline bool identical_partitions(const ContingencyTable& t) {
    if (t.rows != t.cols) return false;
    for (std::size_t i = 0; i < t.rows; ++i) {
        int nonzero = 0;
        for (std::size_t j = 0; j < t.cols; ++j)
            if (t.at(i, j) != 0) ++nonzero;
        if (nonzero != 1) return false;
    }
    for (std::size_t j = 0; j < t.cols; ++j) {
        int nonzero = 0;
        for (std::size_t i = 0; i < t.rows; ++i)
            if (t.at(i, j) != 0) ++nonzero;
        if (nonzero != 1) return false;
    }
    return true;
}

}  // namespace detail

// Adjusted Rand index of two labelings, in [-1, 1]; 1 iff they induce the
// same partition. When the adjustment denominator vanishes (both partitions
// all-singletons or both single-cluster) the result is 1 for identical
// partitions and 0 otherwise, with `degenerate` flagged.
inline double adjusted_rand_index(std::span<const int> g, std::span<const int> p,
                                  bool* degenerate = nullptr) {
    const ContingencyTable table = contingency_table(g, p);
    if (degenerate) *degenerate = false;

    double sum_cells = 0.0;
    for (std::int64_t o : table.counts) sum_cells += detail::comb2(o);
    double sum_rows = 0.0;
    for (std::int64_t a : table.row_sums) sum_rows += detail::comb2(a);
    double sum_cols = 0.0;
    for (std::int64_t b : table.col_sums) sum_cols += detail::comb2(b);
    const double pairs = detail::comb2(table.total);

    const double expected = sum_rows * sum_cols / pairs;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) {
        if (degenerate) *degenerate = true;
        return detail::identical_partitions(table) ? 1.0 : 0.0;
    }
    return (sum_cells - expected) / (maximum - expected);
}

// Entropy diversity over per-image misclassification counts:
//   E = (1/M) sum_i min(zeta_i, T - zeta_i) / (T - ceil(T/2)),  E in [0, 1].
inline double entropy_measure(std::span<const int> zeta, int t, int m) {
    require(t >= 2, errc::t_denominator_zero, "entropy needs at least two classifiers");
    require(m >= 1 && static_cast<std::size_t>(m) == zeta.size(), errc::length_mismatch,
            "zeta length must equal the image count");
    const double denom = static_cast<double>(t - (t + 1) / 2);  // T - ceil(T/2)
    double sum = 0.0;
    for (int z : zeta) {
        require(z >= 0 && z <= t, errc::count_out_of_range,
                "zeta outside [0, T]");
        sum += static_cast<double>(std::min(z, t - z)) / denom;
    }
    return sum / static_cast<double>(m);
}

// Leave-one-out credibility: predict every training item against the rest of
// the training set and score the predictions against ground truth with ARI.
inline double loo_credibility(std::span<const Matrix> train_features,
                              std::span<const int> train_labels,
                              const KnnConfig& knn) {
    require(train_features.size() == train_labels.size(), errc::length_mismatch,
            "feature/label counts differ");
    require(train_features.size() >= 2, errc::too_few_items,
            "leave-one-out needs at least two training images");
    require(knn.k >= 1 &&
                knn.k <= static_cast<int>(train_features.size()) - 1,
            errc::bad_argument, "k out of range for leave-one-out");

    const std::size_t m = train_features.size();
    std::vector<int> predictions(m);
    std::vector<GalleryItem> gallery;
    gallery.reserve(m - 1);
    for (std::size_t j = 0; j < m; ++j) {
        gallery.clear();
        for (std::size_t i = 0; i < m; ++i)
            if (i != j) gallery.push_back({&train_features[i], train_labels[i]});
        predictions[j] = knn_predict(train_features[j], gallery, knn);
    }
    std::vector<int> truth(train_labels.begin(), train_labels.end());
    return adjusted_rand_index(truth, predictions);
}

// w = max(ari, kAriFloor)^b; b = 0 gives uniform weights.
inline double weight_from_ari(double ari, double b) {
    require(b >= 0.0, errc::bad_argument, "exponent b must be non-negative");
    return std::pow(std::max(ari, kAriFloor), b);
}

// Weights for a classifier set. Falls back to uniform weights when every
// ARI sits at the clamp floor, or when ari^b underflowed to zero across the
// board; either way the vote degrades to plain majority instead of failing.
inline std::vector<double> weights_from_aris(std::span<const ClassifierSpec> classifiers,
                                             double b) {
    bool all_floored = true;
    for (const auto& spec : classifiers) all_floored = all_floored && spec.ari <= kAriFloor;
    std::vector<double> weights(classifiers.size());
    double max_weight = 0.0;
    for (std::size_t t = 0; t < classifiers.size(); ++t) {
        weights[t] = all_floored ? 1.0 : weight_from_ari(classifiers[t].ari, b);
        max_weight = std::max(max_weight, weights[t]);
    }
    if (max_weight == 0.0) std::fill(weights.begin(), weights.end(), 1.0);
    return weights;
}

// ---------------------------------------------------------------------------
// the pipeline

struct EnsembleOutcome {
    std::vector<ClassifierSpec> classifiers;
    std::vector<std::vector<int>> classifier_predictions;  // [t][test image]
    std::vector<int> predictions;                          // ensemble decision E_j
    std::vector<int> test_truth;
    int class_count = 0;
    DiversityReport diversity;
    double accuracy = 0.0;
};

namespace detail {

struct ClassifierRun {
    ClassifierSpec spec;
    std::vector<int> test_predictions;
};

inline std::vector<int> iota_indices(int count) {
    std::vector<int> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

// One classifier: sample index sets, project train and test images, run
// leave-one-out for the ARI, and predict the test set.
inline ClassifierRun run_classifier(const LabeledDataset& ds, const SplitPlan& split,
                                    const ProjectionBasis& basis,
                                    const EnsembleConfig& cfg, std::uint64_t stream) {
    Rng rng(stream);
    ClassifierRun run;
    if (basis.spec.uses_left())
        run.spec.left_indices = sample_subspace(basis.left->spectrum(), cfg.d, rng);
    if (basis.spec.uses_right())
        run.spec.right_indices = sample_subspace(basis.right->spectrum(), cfg.d, rng);

    std::vector<Matrix> train_features;
    train_features.reserve(split.train.size());
    std::vector<int> train_labels;
    train_labels.reserve(split.train.size());
    for (int idx : split.train) {
        train_features.push_back(project(ds.images[static_cast<std::size_t>(idx)], basis,
                                         run.spec.left_indices, run.spec.right_indices)
                                     .values);
        train_labels.push_back(ds.labels[static_cast<std::size_t>(idx)]);
    }

    run.spec.ari = loo_credibility(train_features, train_labels, cfg.knn);

    std::vector<GalleryItem> gallery(train_features.size());
    for (std::size_t i = 0; i < train_features.size(); ++i)
        gallery[i] = {&train_features[i], train_labels[i]};

    run.test_predictions.reserve(split.test.size());
    for (int idx : split.test) {
        const Matrix feat = project(ds.images[static_cast<std::size_t>(idx)], basis,
                                    run.spec.left_indices, run.spec.right_indices)
                                .values;
        run.test_predictions.push_back(knn_predict(feat, gallery, cfg.knn));
    }
    return run;
}

}  // namespace detail

// Re-derives the ensemble decision from stored per-classifier predictions,
// either weighted (by the stored specs' weights) or by plain majority.
inline void combine_votes(EnsembleOutcome& outcome, std::span<const double> weights) {
    const std::size_t n_test = outcome.test_truth.size();
    outcome.predictions.resize(n_test);
    std::vector<int> votes(outcome.classifiers.size());
    for (std::size_t j = 0; j < n_test; ++j) {
        for (std::size_t t = 0; t < outcome.classifiers.size(); ++t)
            votes[t] = outcome.classifier_predictions[t][j];
        outcome.predictions[j] =
            weighted_vote(votes, weights, outcome.class_count).decided;
    }
    std::size_t correct = 0;
    for (std::size_t j = 0; j < n_test; ++j)
        if (outcome.predictions[j] == outcome.test_truth[j]) ++correct;
    outcome.accuracy =
        n_test == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n_test);
}

// Applies a new ARI exponent to an existing run: recomputes the weights from
// the stored ARIs and revotes. Classifier predictions are left untouched.
inline void reweigh(EnsembleOutcome& outcome, double b) {
    const std::vector<double> weights = weights_from_aris(outcome.classifiers, b);
    for (std::size_t t = 0; t < outcome.classifiers.size(); ++t)
        outcome.classifiers[t].weight = weights[t];
    combine_votes(outcome, weights);
}

// Unweighted majority decision from the same per-classifier predictions.
inline std::pair<std::vector<int>, double> majority_decision(
    const EnsembleOutcome& outcome) {
    const std::size_t n_test = outcome.test_truth.size();
    std::vector<int> decisions(n_test);
    std::vector<int> votes(outcome.classifiers.size());
    std::size_t correct = 0;
    for (std::size_t j = 0; j < n_test; ++j) {
        for (std::size_t t = 0; t < outcome.classifiers.size(); ++t)
            votes[t] = outcome.classifier_predictions[t][j];
        decisions[j] = majority_vote(votes, outcome.class_count).decided;
        if (decisions[j] == outcome.test_truth[j]) ++correct;
    }
    const double accuracy =
        n_test == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n_test);
    return {std::move(decisions), accuracy};
}

// The full pipeline: fit the basis once on the training split, build T
// classifiers from per-classifier RNG streams (classifier t's stream depends
// only on (seed, t), so any execution order gives identical results), score
// each by leave-one-out ARI, weight by ARI^b, and combine test votes by
// weighted majority. Diversity is reported over test-set correctness.
inline EnsembleOutcome fit_predict(const LabeledDataset& ds, const SplitPlan& split,
                                   const EnsembleConfig& cfg, int threads = 0) {
    require(cfg.t >= 1, errc::bad_argument, "ensemble needs at least one classifier");
    require(!split.train.empty() && !split.test.empty(), errc::empty_subset,
            "split has an empty side");

    MethodSpec method;
    method.family = cfg.family;
    method.scheme = cfg.scheme;
    method.d = cfg.d;
    method.d1 = cfg.d;
    method.d2 = cfg.d;
    const ProjectionBasis basis = fit_basis(ds, split.train, method);
    if (basis.left)
        require(cfg.d <= basis.left->spectrum(), errc::d_too_large,
                "d exceeds the left spectrum");
    if (basis.right)
        require(cfg.d <= basis.right->spectrum(), errc::d_too_large,
                "d exceeds the right spectrum");

    std::vector<detail::ClassifierRun> runs(static_cast<std::size_t>(cfg.t));
    parallel_for(static_cast<std::size_t>(cfg.t), threads, [&](std::size_t t) {
        const std::uint64_t stream = mix_seed(cfg.seed, 0xC1A551F1ULL + t);
        runs[t] = detail::run_classifier(ds, split, basis, cfg, stream);
    });

    EnsembleOutcome outcome;
    outcome.class_count = ds.class_count();
    outcome.classifiers.reserve(runs.size());
    outcome.classifier_predictions.reserve(runs.size());
    for (auto& run : runs) {
        outcome.classifiers.push_back(std::move(run.spec));
        outcome.classifier_predictions.push_back(std::move(run.test_predictions));
    }
    outcome.test_truth.reserve(split.test.size());
    for (int idx : split.test)
        outcome.test_truth.push_back(ds.labels[static_cast<std::size_t>(idx)]);

    reweigh(outcome, cfg.b);

    outcome.diversity.t = cfg.t;
    outcome.diversity.zeta.assign(outcome.test_truth.size(), 0);
    for (std::size_t j = 0; j < outcome.test_truth.size(); ++j)
        for (std::size_t t = 0; t < outcome.classifiers.size(); ++t)
            if (outcome.classifier_predictions[t][j] != outcome.test_truth[j])
                ++outcome.diversity.zeta[j];
    outcome.diversity.entropy =
        cfg.t >= 2 ? entropy_measure(outcome.diversity.zeta, cfg.t,
                                     static_cast<int>(outcome.test_truth.size()))
                   : 0.0;
    return outcome;
}

// Non-ensemble baseline: a single classifier on the top-d eigenvectors
// (top d x d for bilateral schemes), scored by plain KNN accuracy.
inline double classic_accuracy(const LabeledDataset& ds, const SplitPlan& split,
                               Family family, Scheme scheme, int top_d,
                               const KnnConfig& knn) {
    MethodSpec method;
    method.family = family;
    method.scheme = scheme;
    method.d = top_d;
    method.d1 = top_d;
    method.d2 = top_d;
    const ProjectionBasis basis = fit_basis(ds, split.train, method);
    if (basis.left)
        require(top_d <= basis.left->spectrum(), errc::d_too_large,
                "baseline eigenvector count exceeds the left spectrum");
    if (basis.right)
        require(top_d <= basis.right->spectrum(), errc::d_too_large,
                "baseline eigenvector count exceeds the right spectrum");

    std::vector<Matrix> train_features;
    std::vector<int> train_labels;
    train_features.reserve(split.train.size());
    for (int idx : split.train) {
        train_features.push_back(
            project_top(ds.images[static_cast<std::size_t>(idx)], basis).values);
        train_labels.push_back(ds.labels[static_cast<std::size_t>(idx)]);
    }
    std::vector<GalleryItem> gallery(train_features.size());
    for (std::size_t i = 0; i < train_features.size(); ++i)
        gallery[i] = {&train_features[i], train_labels[i]};

    std::size_t correct = 0;
    for (int idx : split.test) {
        const Matrix feat =
            project_top(ds.images[static_cast<std::size_t>(idx)], basis).values;
        if (knn_predict(feat, gallery, knn) == ds.labels[static_cast<std::size_t>(idx)])
            ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(split.test.size());
}

// ---------------------------------------------------------------------------
// model files: the basis container plus a plain-text classifier table

namespace detail {

inline std::string format_index_list(const std::vector<int>& indices) {
    if (indices.empty()) return "-";
    std::ostringstream out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) out << ",";
        out << indices[i];
    }
    return out.str();
}

inline std::vector<int> parse_index_list(const std::string& text) {
    if (text == "-") return {};
    std::vector<int> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        require(!item.empty(), errc::parse_error, "empty index in classifier table");
        out.push_back(std::stoi(item));
    }
    return out;
}

}  // namespace detail

inline void save_classifier_table(const std::filesystem::path& path,
                                  std::span<const ClassifierSpec> classifiers) {
    std::ofstream out(path, std::ios::trunc);
    require(out.good(), errc::io_error, "cannot open " + path.string());
    out << "# facekit classifier table 1\n";
    out << "# columns: index left_indices right_indices ari weight\n";
    out.precision(17);
    for (std::size_t t = 0; t < classifiers.size(); ++t)
        out << t << " " << detail::format_index_list(classifiers[t].left_indices) << " "
            << detail::format_index_list(classifiers[t].right_indices) << " "
            << classifiers[t].ari << " " << classifiers[t].weight << "\n";
    require(out.good(), errc::io_error, "write failure on " + path.string());
}

inline std::vector<ClassifierSpec> load_classifier_table(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), errc::io_error, "cannot open " + path.string());
    std::vector<ClassifierSpec> classifiers;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::size_t index;
        std::string left, right;
        ClassifierSpec spec;
        fields >> index >> left >> right >> spec.ari >> spec.weight;
        require(!fields.fail(), errc::parse_error,
                "bad classifier table line: " + line);
        require(index == classifiers.size(), errc::parse_error,
                "classifier table indices must be consecutive");
        spec.left_indices = detail::parse_index_list(left);
        spec.right_indices = detail::parse_index_list(right);
        classifiers.push_back(std::move(spec));
    }
    return classifiers;
}

inline void save_ensemble(const std::filesystem::path& basis_path,
                          const std::filesystem::path& table_path,
                          const ProjectionBasis& basis,
                          std::span<const ClassifierSpec> classifiers) {
    save_basis(basis_path, basis);
    save_classifier_table(table_path, classifiers);
}

inline std::pair<ProjectionBasis, std::vector<ClassifierSpec>> load_ensemble(
    const std::filesystem::path& basis_path,
    const std::filesystem::path& table_path) {
    return {load_basis(basis_path), load_classifier_table(table_path)};
}

}  // namespace facekit
