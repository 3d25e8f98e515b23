#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "facekit/classify.hpp"
#include "facekit/dataset.hpp"
#include "test_support.hpp"

using facekit::ImageMatrix;
using facekit::LabeledDataset;
using facekit::Matrix;
using facekit::SplitPlan;
using facekit::errc;
using testsupport::TempDir;
using testsupport::thrown_code;

TEST_CASE("manifest loading maps labels to dense ids in first-seen order",
          "[dataset]") {
    TempDir dir("manifest");
    for (int i = 0; i < 4; ++i)
        facekit::save_pgm(dir.path() / ("img" + std::to_string(i) + ".pgm"),
                          ImageMatrix(2, 2, static_cast<double>(i)));
    {
        std::ofstream out(dir.path() / "manifest.txt");
        out << "# comment line\n";
        out << "img0.pgm bob\n";
        out << "img1.pgm alice\n";
        out << "img2.pgm bob\n";
        out << "img3.pgm carol\n";
    }
    const LabeledDataset ds = facekit::load_manifest(dir.path() / "manifest.txt");
    REQUIRE(ds.size() == 4);
    REQUIRE(ds.class_count() == 3);
    REQUIRE(ds.class_names == std::vector<std::string>{"bob", "alice", "carol"});
    REQUIRE(ds.labels == std::vector<int>{0, 1, 0, 2});
    REQUIRE(ds.per_class_counts == std::vector<int>{2, 1, 1});

    {
        std::ofstream out(dir.path() / "bad.txt");
        out << "missing.pgm bob\n";
    }
    REQUIRE(thrown_code([&] { facekit::load_manifest(dir.path() / "bad.txt"); }) ==
            errc::io_error);
}

TEST_CASE("dataset invariants are enforced", "[dataset]") {
    std::vector<ImageMatrix> images{ImageMatrix(2, 2), ImageMatrix(2, 3)};
    REQUIRE(thrown_code([&] { facekit::make_dataset(images, {0, 1}); }) ==
            errc::shape_mismatch);
    REQUIRE(thrown_code([] {
                facekit::make_dataset({ImageMatrix(2, 2)}, {0, 1});
            }) == errc::length_mismatch);
    // label 1 never used -> class 1 would be empty
    REQUIRE(thrown_code([] {
                facekit::make_dataset({ImageMatrix(2, 2), ImageMatrix(2, 2)}, {0, 2});
            }) == errc::bad_argument);
}

TEST_CASE("stratified split: exhaustive train side", "[dataset]") {
    const LabeledDataset ds = facekit::synth_dataset(3, 4, 2, 2, 10.0, 1.0, 5);
    const SplitPlan plan = facekit::stratified_split(ds, 4, 0, 99);
    REQUIRE(plan.train.size() == 12);
    REQUIRE(plan.test.empty());
    for (std::size_t i = 0; i < ds.size(); ++i)
        REQUIRE(std::find(plan.train.begin(), plan.train.end(), static_cast<int>(i)) !=
                plan.train.end());
}

TEST_CASE("stratified split: ORL-shaped 40x10 protocol gives 200/200", "[dataset]") {
    const LabeledDataset ds = facekit::synth_dataset(40, 10, 3, 2, 10.0, 1.0, 6);
    const SplitPlan plan = facekit::stratified_split(ds, 5, 5, 123);
    REQUIRE(plan.train.size() == 200);
    REQUIRE(plan.test.size() == 200);
    std::vector<int> train_per_class(40, 0), test_per_class(40, 0);
    for (int i : plan.train) ++train_per_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])];
    for (int i : plan.test) ++test_per_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])];
    for (int c = 0; c < 40; ++c) {
        REQUIRE(train_per_class[static_cast<std::size_t>(c)] == 5);
        REQUIRE(test_per_class[static_cast<std::size_t>(c)] == 5);
    }
}

TEST_CASE("stratified split determinism and seed sensitivity", "[dataset]") {
    const LabeledDataset ds = facekit::synth_dataset(6, 8, 2, 2, 10.0, 1.0, 7);
    const SplitPlan a = facekit::stratified_split(ds, 3, 3, 42);
    const SplitPlan b = facekit::stratified_split(ds, 3, 3, 42);
    REQUIRE(a.train == b.train);
    REQUIRE(a.test == b.test);

    bool any_difference = false;
    for (std::uint64_t seed = 100; seed < 105; ++seed) {
        const SplitPlan other = facekit::stratified_split(ds, 3, 3, seed);
        any_difference = any_difference || other.train != a.train;
    }
    REQUIRE(any_difference);
}

TEST_CASE("stratified split rejects undersized classes", "[dataset]") {
    const LabeledDataset ds = facekit::synth_dataset(3, 4, 2, 2, 10.0, 1.0, 8);
    REQUIRE(thrown_code([&] { facekit::stratified_split(ds, 3, 2, 0); }) ==
            errc::insufficient_samples);
}

TEST_CASE("stratified split disjointness and per-class exactness hold broadly",
          "[dataset]") {
    std::mt19937_64 gen(51);
    for (int rep = 0; rep < 20; ++rep) {
        const int classes = 2 + static_cast<int>(gen() % 6);
        const int per_class = 2 + static_cast<int>(gen() % 7);
        const LabeledDataset ds =
            facekit::synth_dataset(classes, per_class, 2, 3, 5.0, 1.0, gen());
        const int train_n = 1 + static_cast<int>(gen() % static_cast<unsigned>(per_class - 1));
        const int test_n = static_cast<int>(gen() % static_cast<unsigned>(per_class - train_n + 1));
        if (train_n + test_n == 0) continue;
        const SplitPlan plan = facekit::stratified_split(ds, train_n, test_n, gen());

        std::set<int> train_set(plan.train.begin(), plan.train.end());
        std::set<int> test_set(plan.test.begin(), plan.test.end());
        REQUIRE(train_set.size() == plan.train.size());
        REQUIRE(test_set.size() == plan.test.size());
        for (int idx : test_set) REQUIRE(train_set.count(idx) == 0);

        std::vector<int> per_train(static_cast<std::size_t>(classes), 0);
        std::vector<int> per_test(static_cast<std::size_t>(classes), 0);
        for (int i : plan.train) ++per_train[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])];
        for (int i : plan.test) ++per_test[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])];
        for (int c = 0; c < classes; ++c) {
            REQUIRE(per_train[static_cast<std::size_t>(c)] == train_n);
            REQUIRE(per_test[static_cast<std::size_t>(c)] == test_n);
        }
    }
}

TEST_CASE("synthetic dataset degenerate cases", "[dataset]") {
    const LabeledDataset no_noise = facekit::synth_dataset(3, 4, 3, 3, 25.0, 0.0, 9);
    for (std::size_t i = 0; i < no_noise.size(); ++i)
        for (std::size_t j = i + 1; j < no_noise.size(); ++j)
            if (no_noise.labels[i] == no_noise.labels[j])
                REQUIRE(no_noise.images[i] == no_noise.images[j]);

    const LabeledDataset flat = facekit::synth_dataset(3, 2, 3, 3, 0.0, 0.0, 10);
    for (std::size_t i = 1; i < flat.size(); ++i)
        REQUIRE(flat.images[i] == flat.images[0]);
}

TEST_CASE("well-separated synthetic data is 1-NN perfect on raw pixels",
          "[dataset]") {
    // pipeline self-oracle: class_sep >> noise
    const LabeledDataset ds = facekit::synth_dataset(8, 6, 6, 5, 60.0, 1.0, 11);
    const SplitPlan plan = facekit::stratified_split(ds, 3, 3, 12);
    std::vector<facekit::GalleryItem> gallery;
    for (int idx : plan.train)
        gallery.push_back({&ds.images[static_cast<std::size_t>(idx)],
                           ds.labels[static_cast<std::size_t>(idx)]});
    for (int idx : plan.test) {
        const int predicted = facekit::knn_predict(
            ds.images[static_cast<std::size_t>(idx)], gallery,
            facekit::KnnConfig{1, facekit::Metric::frobenius});
        REQUIRE(predicted == ds.labels[static_cast<std::size_t>(idx)]);
    }
}

TEST_CASE("split plan file round-trip", "[dataset]") {
    TempDir dir("split");
    const LabeledDataset ds = facekit::synth_dataset(4, 6, 2, 2, 10.0, 1.0, 13);
    const SplitPlan plan = facekit::stratified_split(ds, 2, 2, 777);
    const auto path = dir.path() / "plan.txt";
    facekit::save_split(path, plan);
    const SplitPlan loaded = facekit::load_split(path);
    REQUIRE(loaded.train == plan.train);
    REQUIRE(loaded.test == plan.test);
    REQUIRE(loaded.per_class_train == plan.per_class_train);
    REQUIRE(loaded.per_class_test == plan.per_class_test);
    REQUIRE(loaded.seed == plan.seed);

    std::ofstream(dir.path() / "junk.txt") << "not a plan\n";
    REQUIRE(thrown_code([&] { facekit::load_split(dir.path() / "junk.txt"); }) ==
            errc::parse_error);
}
