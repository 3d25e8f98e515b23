#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "facekit/ensemble.hpp"
#include "test_support.hpp"

using facekit::EnsembleConfig;
using facekit::EnsembleOutcome;
using facekit::Family;
using facekit::LabeledDataset;
using facekit::Matrix;
using facekit::Metric;
using facekit::Rng;
using facekit::Scheme;
using facekit::SplitPlan;
using facekit::errc;
using testsupport::thrown_code;

namespace {

// Pairwise-counting oracle for the adjusted Rand index: count item pairs
// that are together/apart in each labeling and apply the adjusted formula.
double ari_pairwise_oracle(const std::vector<int>& g, const std::vector<int>& p) {
    const std::size_t m = g.size();
    double both = 0.0, g_only = 0.0, p_only = 0.0, neither = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const bool same_g = g[i] == g[j];
            const bool same_p = p[i] == p[j];
            if (same_g && same_p) both += 1.0;
            else if (same_g) g_only += 1.0;
            else if (same_p) p_only += 1.0;
            else neither += 1.0;
        }
    const double pairs = both + g_only + p_only + neither;
    const double sum_g = both + g_only;  // pairs together in g
    const double sum_p = both + p_only;  // pairs together in p
    const double expected = sum_g * sum_p / pairs;
    const double maximum = 0.5 * (sum_g + sum_p);
    // identical partitions <=> no pair is together in one labeling but apart
    // in the other
    if (maximum == expected) return g_only + p_only == 0.0 ? 1.0 : 0.0;
    return (both - expected) / (maximum - expected);
}

LabeledDataset separable_dataset(int classes, int per_class, std::uint64_t seed) {
    return facekit::synth_dataset(classes, per_class, 6, 5, 60.0, 1.5, seed);
}

}  // namespace

TEST_CASE("sample_subspace basic contracts", "[ensemble]") {
    Rng rng(1);
    const auto all = facekit::sample_subspace(5, 5, rng);
    REQUIRE(all == std::vector<int>{0, 1, 2, 3, 4});

    const auto one = facekit::sample_subspace(5, 1, rng);
    REQUIRE(one.size() == 1);
    REQUIRE(one[0] >= 0);
    REQUIRE(one[0] < 5);

    REQUIRE(thrown_code([&] { facekit::sample_subspace(4, 5, rng); }) ==
            errc::d_too_large);
}

TEST_CASE("sample_subspace draws unordered pairs uniformly", "[ensemble]") {
    // 10,000 draws of d=2 from 5: each of the 10 pairs has expectation 1000,
    // sd = sqrt(10000 * 0.1 * 0.9) = 30, so a 4-sigma band is +-120.
    Rng rng(20240817);
    std::map<std::pair<int, int>, int> frequency;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const auto pair = facekit::sample_subspace(5, 2, rng);
        ++frequency[{pair[0], pair[1]}];
    }
    REQUIRE(frequency.size() == 10);
    for (const auto& [pair, count] : frequency) {
        REQUIRE(count >= 1000 - 120);
        REQUIRE(count <= 1000 + 120);
    }
}

TEST_CASE("contingency table sums", "[ensemble]") {
    const std::vector<int> g{0, 0, 1, 1, 2};
    const std::vector<int> p{1, 1, 0, 1, 2};
    const auto table = facekit::contingency_table(g, p);
    REQUIRE(table.total == 5);
    std::int64_t sum = 0;
    for (auto v : table.counts) sum += v;
    REQUIRE(sum == table.total);
    for (std::size_t i = 0; i < table.rows; ++i) {
        std::int64_t row = 0;
        for (std::size_t j = 0; j < table.cols; ++j) row += table.at(i, j);
        REQUIRE(row == table.row_sums[i]);
    }
    for (std::size_t j = 0; j < table.cols; ++j) {
        std::int64_t col = 0;
        for (std::size_t i = 0; i < table.rows; ++i) col += table.at(i, j);
        REQUIRE(col == table.col_sums[j]);
    }
}

TEST_CASE("adjusted Rand index worked examples", "[ensemble]") {
    const std::vector<int> g{0, 0, 1, 1};
    REQUIRE(facekit::adjusted_rand_index(g, g) == 1.0);

    // label permutation of the same partition
    const std::vector<int> permuted{1, 1, 0, 0};
    REQUIRE(facekit::adjusted_rand_index(g, permuted) == 1.0);

    // hand-evaluated: index 1, expected 1, max 2.5 -> ARI 0
    const std::vector<int> p{0, 1, 1, 1};
    REQUIRE(facekit::adjusted_rand_index(g, p) == Catch::Approx(0.0).margin(1e-15));

    REQUIRE(thrown_code([&] {
                facekit::adjusted_rand_index(g, std::vector<int>{0, 1});
            }) == errc::length_mismatch);
    REQUIRE(thrown_code([] {
                facekit::adjusted_rand_index(std::vector<int>{0}, std::vector<int>{0});
            }) == errc::too_few_items);
}

TEST_CASE("adjusted Rand index degenerate denominators", "[ensemble]") {
    bool degenerate = false;
    // both all-singletons: identical partitions
    const std::vector<int> singletons{0, 1, 2, 3};
    REQUIRE(facekit::adjusted_rand_index(singletons, std::vector<int>{3, 0, 1, 2},
                                         &degenerate) == 1.0);
    REQUIRE(degenerate);

    // both single-cluster: identical partitions
    const std::vector<int> lump{7, 7, 7};
    REQUIRE(facekit::adjusted_rand_index(lump, std::vector<int>{2, 2, 2}, &degenerate) ==
            1.0);
    REQUIRE(degenerate);

    // single cluster vs singletons: denominator is fine, ARI = 0
    REQUIRE(facekit::adjusted_rand_index(std::vector<int>{0, 0, 0},
                                         std::vector<int>{0, 1, 2}, &degenerate) == 0.0);
    REQUIRE(!degenerate);
}

TEST_CASE("adjusted Rand index is symmetric and matches the pairwise oracle",
          "[ensemble]") {
    std::mt19937_64 gen(71);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = 2 + gen() % 49;  // M <= 50
        const int gc = 1 + static_cast<int>(gen() % 6);
        const int pc = 1 + static_cast<int>(gen() % 6);
        std::vector<int> g(m), p(m);
        for (auto& v : g) v = static_cast<int>(gen() % static_cast<unsigned>(gc));
        for (auto& v : p) v = static_cast<int>(gen() % static_cast<unsigned>(pc));

        const double ab = facekit::adjusted_rand_index(g, p);
        const double ba = facekit::adjusted_rand_index(p, g);
        REQUIRE(ab == Catch::Approx(ba).margin(1e-15));
        REQUIRE(ab == Catch::Approx(ari_pairwise_oracle(g, p)).margin(1e-12));
        REQUIRE(ab >= -1.0);
        REQUIRE(ab <= 1.0);
    }
}

TEST_CASE("entropy measure worked examples", "[ensemble]") {
    const std::vector<int> zeros{0, 0, 0};
    REQUIRE(facekit::entropy_measure(zeros, 4, 3) == 0.0);

    const std::vector<int> split{1};
    REQUIRE(facekit::entropy_measure(split, 2, 1) == 1.0);

    // (min(2,3)/2 + min(1,4)/2) / 2 = 0.75
    const std::vector<int> mixed{2, 1};
    REQUIRE(facekit::entropy_measure(mixed, 5, 2) == Catch::Approx(0.75).margin(1e-15));

    REQUIRE(thrown_code([&] { facekit::entropy_measure(split, 1, 1); }) ==
            errc::t_denominator_zero);
    REQUIRE(thrown_code([] {
                facekit::entropy_measure(std::vector<int>{9}, 4, 1);
            }) == errc::count_out_of_range);
    REQUIRE(thrown_code([] {
                facekit::entropy_measure(std::vector<int>{1, 1}, 4, 1);
            }) == errc::length_mismatch);
}

TEST_CASE("entropy stays in [0,1] and peaks at an even split", "[ensemble]") {
    std::mt19937_64 gen(73);
    for (int rep = 0; rep < 100; ++rep) {
        const int t = 2 + static_cast<int>(gen() % 12);
        const std::size_t m = 1 + gen() % 20;
        std::vector<int> zeta(m);
        for (auto& z : zeta) z = static_cast<int>(gen() % static_cast<unsigned>(t + 1));
        const double e = facekit::entropy_measure(zeta, t, static_cast<int>(m));
        REQUIRE(e >= 0.0);
        REQUIRE(e <= 1.0);
    }
    for (int t : {2, 4, 8}) {
        const std::vector<int> half(6, t / 2);
        REQUIRE(facekit::entropy_measure(half, t, 6) == 1.0);
    }
}

TEST_CASE("weight_from_ari", "[ensemble]") {
    REQUIRE(facekit::weight_from_ari(0.37, 0.0) == 1.0);
    REQUIRE(facekit::weight_from_ari(1.0, 7.5) == 1.0);
    REQUIRE(facekit::weight_from_ari(0.25, 2.0) == Catch::Approx(0.0625).margin(1e-15));
    // floor keeps negative ARIs legal
    REQUIRE(facekit::weight_from_ari(-0.5, 2.5) ==
            Catch::Approx(std::pow(1e-6, 2.5)).margin(1e-20));
    REQUIRE(thrown_code([] { facekit::weight_from_ari(0.5, -1.0); }) ==
            errc::bad_argument);
}

TEST_CASE("loo credibility on separable, shuffled and twinned data", "[ensemble]") {
    // perfectly separable projections -> every LOO prediction is right
    std::mt19937_64 gen(79);
    std::vector<Matrix> features;
    std::vector<int> labels;
    for (int c = 0; c < 4; ++c)
        for (int s = 0; s < 5; ++s) {
            Matrix f(2, 2, static_cast<double>(100 * c));
            f(0, 0) += static_cast<double>(s);  // small within-class spread
            features.push_back(f);
            labels.push_back(c);
        }
    facekit::KnnConfig knn{1, Metric::frobenius};
    REQUIRE(facekit::loo_credibility(features, labels, knn) == 1.0);

    // random labels -> ARI near zero
    std::vector<int> shuffled = labels;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        worst = std::max(worst,
                         std::abs(facekit::loo_credibility(features, shuffled, knn)));
    }
    REQUIRE(worst < 0.5);  // small sample; the M=200 bound lives in acceptance

    // duplicated dataset: the twin is always the nearest neighbor at k=1
    std::vector<Matrix> twinned;
    std::vector<int> twin_labels;
    for (std::size_t i = 0; i < features.size(); ++i) {
        Matrix noisy = testsupport::random_matrix(2, 2, gen, 50.0);
        twinned.push_back(noisy);
        twinned.push_back(noisy);
        twin_labels.push_back(static_cast<int>(i % 3));
        twin_labels.push_back(static_cast<int>(i % 3));
    }
    REQUIRE(facekit::loo_credibility(twinned, twin_labels, knn) == 1.0);

    REQUIRE(thrown_code([&] {
                facekit::loo_credibility(std::vector<Matrix>{features[0]},
                                         std::vector<int>{0}, knn);
            }) == errc::too_few_items);
}

TEST_CASE("fit_predict: single-classifier ensemble equals that classifier",
          "[ensemble]") {
    const LabeledDataset ds = separable_dataset(5, 6, 83);
    const SplitPlan split = facekit::stratified_split(ds, 3, 3, 84);
    EnsembleConfig cfg;
    cfg.family = Family::lda;
    cfg.scheme = Scheme::right;
    cfg.t = 1;
    cfg.d = 2;
    cfg.b = 3.7;
    cfg.seed = 85;
    const EnsembleOutcome outcome = facekit::fit_predict(ds, split, cfg);
    REQUIRE(outcome.predictions == outcome.classifier_predictions[0]);
}

TEST_CASE("fit_predict: b = 0 reduces to unweighted majority voting", "[ensemble]") {
    const LabeledDataset ds = facekit::synth_dataset(4, 8, 5, 4, 12.0, 9.0, 87);
    const SplitPlan split = facekit::stratified_split(ds, 4, 4, 88);
    EnsembleConfig cfg;
    cfg.family = Family::pca;
    cfg.scheme = Scheme::bilateral;
    cfg.t = 9;
    cfg.d = 2;
    cfg.b = 0.0;
    cfg.seed = 89;
    const EnsembleOutcome outcome = facekit::fit_predict(ds, split, cfg);
    const auto [majority, majority_accuracy] = facekit::majority_decision(outcome);
    REQUIRE(outcome.predictions == majority);
    REQUIRE(outcome.accuracy == majority_accuracy);
}

TEST_CASE("fit_predict reaches accuracy 1.0 on cleanly separable data for all six variants",
          "[ensemble]") {
    const LabeledDataset ds = separable_dataset(6, 6, 91);
    const SplitPlan split = facekit::stratified_split(ds, 3, 3, 92);
    for (Family family : {Family::pca, Family::lda})
        for (Scheme scheme : {Scheme::right, Scheme::left, Scheme::bilateral}) {
            EnsembleConfig cfg;
            cfg.family = family;
            cfg.scheme = scheme;
            cfg.t = 7;
            cfg.d = 3;
            cfg.seed = 93;
            const EnsembleOutcome outcome = facekit::fit_predict(ds, split, cfg);
            INFO(facekit::method_name(family, scheme));
            REQUIRE(outcome.accuracy == 1.0);
        }
}

TEST_CASE("fit_predict is deterministic and thread-count independent", "[ensemble]") {
    const LabeledDataset ds = facekit::synth_dataset(5, 6, 5, 4, 10.0, 8.0, 95);
    const SplitPlan split = facekit::stratified_split(ds, 3, 3, 96);
    EnsembleConfig cfg;
    cfg.family = Family::lda;
    cfg.scheme = Scheme::bilateral;
    cfg.t = 8;
    cfg.d = 2;
    cfg.seed = 97;
    const EnsembleOutcome serial = facekit::fit_predict(ds, split, cfg, 1);
    const EnsembleOutcome threaded = facekit::fit_predict(ds, split, cfg, 4);
    REQUIRE(serial.predictions == threaded.predictions);
    REQUIRE(serial.accuracy == threaded.accuracy);
    REQUIRE(serial.diversity.zeta == threaded.diversity.zeta);
    for (std::size_t t = 0; t < serial.classifiers.size(); ++t) {
        REQUIRE(serial.classifiers[t].right_indices ==
                threaded.classifiers[t].right_indices);
        REQUIRE(serial.classifiers[t].left_indices ==
                threaded.classifiers[t].left_indices);
        REQUIRE(serial.classifiers[t].ari == threaded.classifiers[t].ari);
        REQUIRE(serial.classifiers[t].weight == threaded.classifiers[t].weight);
    }
}

TEST_CASE("fit_predict with the full spectrum and T = 1 reproduces the classic baseline",
          "[ensemble]") {
    const LabeledDataset ds = facekit::synth_dataset(4, 6, 5, 4, 14.0, 6.0, 99);
    const SplitPlan split = facekit::stratified_split(ds, 3, 3, 100);
    for (Family family : {Family::pca, Family::lda}) {
        EnsembleConfig cfg;
        cfg.family = family;
        cfg.scheme = Scheme::right;
        cfg.t = 1;
        cfg.d = static_cast<int>(ds.image_cols());  // full spectrum: sampling is exhaustive
        cfg.seed = 101;
        const EnsembleOutcome ensemble = facekit::fit_predict(ds, split, cfg);
        const double classic = facekit::classic_accuracy(
            ds, split, family, Scheme::right, cfg.d, cfg.knn);
        REQUIRE(ensemble.accuracy == classic);
    }
}

TEST_CASE("noisy-regime ensemble behaves sanely", "[ensemble]") {
    // hard but not hopeless: single classifiers land mid-range and the
    // ensemble has to do real work
    const LabeledDataset ds = facekit::synth_dataset(10, 8, 8, 7, 9.0, 7.0, 501);
    const SplitPlan split = facekit::stratified_split(ds, 4, 4, 502);
    EnsembleConfig cfg;
    cfg.family = Family::lda;
    cfg.scheme = Scheme::right;
    cfg.t = 20;
    cfg.d = 2;
    cfg.knn = facekit::KnnConfig{1, Metric::cosine};
    cfg.b = 2.0;
    cfg.seed = 503;
    const EnsembleOutcome out = facekit::fit_predict(ds, split, cfg);

    double single_sum = 0.0;
    for (std::size_t t = 0; t < out.classifiers.size(); ++t) {
        const auto& spec = out.classifiers[t];
        REQUIRE(spec.ari > -1.0);
        REQUIRE(spec.ari <= 1.0);
        REQUIRE(spec.weight > 0.0);
        REQUIRE(spec.right_indices.size() == 2);
        REQUIRE(std::is_sorted(spec.right_indices.begin(), spec.right_indices.end()));
        // weights are a monotone function of the ARIs
        for (std::size_t u = 0; u < out.classifiers.size(); ++u)
            if (spec.ari > out.classifiers[u].ari)
                REQUIRE(spec.weight >= out.classifiers[u].weight);
        int correct = 0;
        for (std::size_t j = 0; j < out.test_truth.size(); ++j)
            if (out.classifier_predictions[t][j] == out.test_truth[j]) ++correct;
        single_sum += static_cast<double>(correct) /
                      static_cast<double>(out.test_truth.size());
    }
    const double mean_single = single_sum / static_cast<double>(out.classifiers.size());

    REQUIRE(out.diversity.entropy > 0.0);
    REQUIRE(out.diversity.entropy <= 1.0);
    // vote combination beats the average individual classifier here
    const auto [majority, majority_acc] = facekit::majority_decision(out);
    REQUIRE(majority_acc > mean_single);
    REQUIRE(out.accuracy > 1.0 / static_cast<double>(ds.class_count()));
}

TEST_CASE("ensemble model files round-trip", "[ensemble]") {
    testsupport::TempDir dir("ensemble");
    const LabeledDataset ds = separable_dataset(4, 5, 103);
    const SplitPlan split = facekit::stratified_split(ds, 3, 2, 104);
    EnsembleConfig cfg;
    cfg.family = Family::lda;
    cfg.scheme = Scheme::bilateral;
    cfg.t = 5;
    cfg.d = 2;
    cfg.seed = 105;
    const EnsembleOutcome outcome = facekit::fit_predict(ds, split, cfg);

    facekit::MethodSpec method;
    method.family = cfg.family;
    method.scheme = cfg.scheme;
    method.d = cfg.d;
    method.d1 = cfg.d;
    method.d2 = cfg.d;
    const auto basis = facekit::fit_basis(ds, split.train, method);

    const auto basis_path = dir.path() / "model.fkb";
    const auto table_path = dir.path() / "model.classifiers";
    facekit::save_ensemble(basis_path, table_path, basis, outcome.classifiers);
    const auto [loaded_basis, loaded_classifiers] =
        facekit::load_ensemble(basis_path, table_path);

    REQUIRE(loaded_basis.right->vectors == basis.right->vectors);
    REQUIRE(loaded_classifiers.size() == outcome.classifiers.size());
    for (std::size_t t = 0; t < loaded_classifiers.size(); ++t) {
        REQUIRE(loaded_classifiers[t].left_indices ==
                outcome.classifiers[t].left_indices);
        REQUIRE(loaded_classifiers[t].right_indices ==
                outcome.classifiers[t].right_indices);
        REQUIRE(loaded_classifiers[t].ari == outcome.classifiers[t].ari);
        REQUIRE(loaded_classifiers[t].weight == outcome.classifiers[t].weight);
    }
}
