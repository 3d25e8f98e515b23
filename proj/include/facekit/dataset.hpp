#pragma once

// Labeled image collections, manifest I/O, stratified train/test splitting
// and a synthetic dataset generator used as a test fixture.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "facekit/error.hpp"
#include "facekit/image.hpp"
#include "facekit/matrix.hpp"
#include "facekit/rng.hpp"

namespace facekit {

struct LabeledDataset {
    std::vector<ImageMatrix> images;     // all share one shape
    std::vector<int> labels;             // dense class ids in [0, class_count)
    std::vector<std::string> class_names;  // id -> original label string
    std::vector<int> per_class_counts;

    std::size_t size() const { return images.size(); }
    int class_count() const { return static_cast<int>(per_class_counts.size()); }
    std::size_t image_rows() const { return images.front().rows(); }
    std::size_t image_cols() const { return images.front().cols(); }
};

// Validates the dataset invariants and fills in the per-class counts.
inline LabeledDataset make_dataset(std::vector<ImageMatrix> images,
                                   std::vector<int> labels,
                                   std::vector<std::string> class_names = {}) {
    require(!images.empty(), errc::bad_argument, "dataset needs at least one image");
    require(images.size() == labels.size(), errc::length_mismatch,
            "image/label counts differ");
    for (const auto& img : images)
        require(img.same_shape(images.front()), errc::shape_mismatch,
                "all dataset images must share one shape");

    int class_count = 0;
    for (int label : labels) {
        require(label >= 0, errc::bad_argument, "labels must be non-negative");
        class_count = std::max(class_count, label + 1);
    }
    std::vector<int> counts(static_cast<std::size_t>(class_count), 0);
    for (int label : labels) ++counts[static_cast<std::size_t>(label)];
    for (int c = 0; c < class_count; ++c)
        require(counts[static_cast<std::size_t>(c)] >= 1, errc::bad_argument,
                "class " + std::to_string(c) + " has no samples");

    if (class_names.empty()) {
        class_names.reserve(static_cast<std::size_t>(class_count));
        for (int c = 0; c < class_count; ++c) class_names.push_back(std::to_string(c));
    }
    require(class_names.size() == static_cast<std::size_t>(class_count),
            errc::length_mismatch, "class name count does not match class count");

    return LabeledDataset{std::move(images), std::move(labels),
                          std::move(class_names), std::move(counts)};
}

// Manifest: one `<relative-path> <class-label>` record per line. Labels are
// arbitrary strings mapped to dense indices in first-seen order. Blank lines
// and lines starting with '#' are skipped.
inline LabeledDataset load_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    require(in.good(), errc::io_error, "cannot open " + manifest_path.string());
    const std::filesystem::path base = manifest_path.parent_path();

    std::vector<ImageMatrix> images;
    std::vector<int> labels;
    std::vector<std::string> class_names;
    std::map<std::string, int> name_to_id;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string rel_path, label;
        fields >> rel_path >> label;
        require(!rel_path.empty() && !label.empty(), errc::parse_error,
                manifest_path.string() + ":" + std::to_string(line_no) +
                    ": expected `<path> <label>`");
        auto [it, inserted] = name_to_id.try_emplace(
            label, static_cast<int>(class_names.size()));
        if (inserted) class_names.push_back(label);
        labels.push_back(it->second);
        images.push_back(load_pgm(base / rel_path));
    }
    require(!images.empty(), errc::parse_error,
            "manifest has no records: " + manifest_path.string());
    return make_dataset(std::move(images), std::move(labels), std::move(class_names));
}

inline void save_manifest(const std::filesystem::path& manifest_path,
                          const std::vector<std::string>& rel_paths,
                          const std::vector<std::string>& labels) {
    require(rel_paths.size() == labels.size(), errc::length_mismatch,
            "path/label counts differ");
    std::ofstream out(manifest_path, std::ios::trunc);
    require(out.good(), errc::io_error, "cannot open " + manifest_path.string());
    for (std::size_t i = 0; i < rel_paths.size(); ++i)
        out << rel_paths[i] << " " << labels[i] << "\n";
    require(out.good(), errc::io_error, "write failure on " + manifest_path.string());
}

struct SplitPlan {
    std::vector<int> train;  // dataset indices, ascending
    std::vector<int> test;   // dataset indices, ascending; disjoint from train
    int per_class_train = 0;
    int per_class_test = 0;
    std::uint64_t seed = 0;
};

// Uniform without-replacement selection of per_class_train + per_class_test
// images inside every class. Deterministic for a fixed seed.
inline SplitPlan stratified_split(const LabeledDataset& ds, int per_class_train,
                                  int per_class_test, std::uint64_t seed) {
    require(per_class_train >= 0 && per_class_test >= 0, errc::bad_argument,
            "per-class counts must be non-negative");
    require(per_class_train + per_class_test >= 1, errc::bad_argument,
            "split selects no images");

    SplitPlan plan;
    plan.per_class_train = per_class_train;
    plan.per_class_test = per_class_test;
    plan.seed = seed;

    Rng rng(mix_seed(seed, 0x511731ULL));
    for (int c = 0; c < ds.class_count(); ++c) {
        std::vector<int> members;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (ds.labels[i] == c) members.push_back(static_cast<int>(i));
        require(static_cast<int>(members.size()) >= per_class_train + per_class_test,
                errc::insufficient_samples,
                "class " + ds.class_names[static_cast<std::size_t>(c)] +
                    " has too few samples for the requested split");
        rng.shuffle(members);
        for (int i = 0; i < per_class_train; ++i)
            plan.train.push_back(members[static_cast<std::size_t>(i)]);
        for (int i = 0; i < per_class_test; ++i)
            plan.test.push_back(members[static_cast<std::size_t>(per_class_train + i)]);
    }
    std::sort(plan.train.begin(), plan.train.end());
    std::sort(plan.test.begin(), plan.test.end());
    return plan;
}

// Synthetic dataset: one fixed random pattern per class around mid-gray,
// plus iid gaussian pixel noise per image. Fully determined by the seed.
inline LabeledDataset synth_dataset(int classes, int per_class, std::size_t rows,
                                    std::size_t cols, double class_sep,
                                    double noise, std::uint64_t seed) {
    require(classes >= 1 && per_class >= 1, errc::bad_argument,
            "class and per-class counts must be at least 1");
    require(rows >= 1 && cols >= 1, errc::bad_argument, "image shape must be positive");
    require(noise >= 0.0, errc::bad_argument, "noise must be non-negative");

    std::vector<ImageMatrix> images;
    std::vector<int> labels;
    images.reserve(static_cast<std::size_t>(classes * per_class));
    for (int c = 0; c < classes; ++c) {
        Rng pattern_rng(mix_seed(mix_seed(seed, 0xA11ce), static_cast<std::uint64_t>(c)));
        Matrix mean(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                mean(i, j) = 128.0 + class_sep * pattern_rng.symmetric_unit();

        for (int s = 0; s < per_class; ++s) {
            const std::uint64_t image_id =
                static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(per_class) +
                static_cast<std::uint64_t>(s);
            Rng noise_rng(mix_seed(mix_seed(seed, 0xB0b), image_id));
            Matrix img = mean;
            if (noise > 0.0)
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j)
                        img(i, j) += noise * noise_rng.gaussian();
            images.push_back(std::move(img));
            labels.push_back(c);
        }
    }
    return make_dataset(std::move(images), std::move(labels));
}

// --- split plan file format -------------------------------------------------
//
//   facekit-split 1
//   seed <u64>
//   per_class_train <n>
//   per_class_test <n>
//   train <i> <i> ...
//   test <i> <i> ...

inline void save_split(const std::filesystem::path& path, const SplitPlan& plan) {
    std::ofstream out(path, std::ios::trunc);
    require(out.good(), errc::io_error, "cannot open " + path.string());
    out << "facekit-split 1\n";
    out << "seed " << plan.seed << "\n";
    out << "per_class_train " << plan.per_class_train << "\n";
    out << "per_class_test " << plan.per_class_test << "\n";
    out << "train";
    for (int i : plan.train) out << " " << i;
    out << "\ntest";
    for (int i : plan.test) out << " " << i;
    out << "\n";
    require(out.good(), errc::io_error, "write failure on " + path.string());
}

inline SplitPlan load_split(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), errc::io_error, "cannot open " + path.string());
    std::string magic;
    int version = 0;
    in >> magic >> version;
    require(in.good() && magic == "facekit-split" && version == 1, errc::parse_error,
            "not a facekit split plan: " + path.string());

    SplitPlan plan;
    std::string key;
    while (in >> key) {
        if (key == "seed") {
            in >> plan.seed;
        } else if (key == "per_class_train") {
            in >> plan.per_class_train;
        } else if (key == "per_class_test") {
            in >> plan.per_class_test;
        } else if (key == "train" || key == "test") {
            auto& target = key == "train" ? plan.train : plan.test;
            int value;
            while (in >> value) target.push_back(value);
            in.clear();  // stopped at the next keyword or EOF
        } else {
            fail(errc::parse_error, "unknown split plan field: " + key);
        }
        require(!in.bad(), errc::io_error, "read failure on " + path.string());
    }
    return plan;
}

}  // namespace facekit
