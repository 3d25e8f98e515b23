#pragma once

// K-nearest-neighbor prediction over feature matrices and the two vote
// combiners. Tie-breaking is deterministic throughout: distance ties go to
// the lower gallery index, label ties among the k neighbors go to the class
// of the single nearest neighbor (then lowest class index), and vote ties go
// to the lowest class index.

#include <algorithm>
#include <span>
#include <vector>

#include "facekit/distance.hpp"
#include "facekit/error.hpp"
#include "facekit/matrix.hpp"

namespace facekit {

struct KnnConfig {
    int k = 1;
    Metric metric = Metric::frobenius;
};

struct GalleryItem {
    const Matrix* features = nullptr;
    int label = 0;
};

struct VoteTally {
    std::vector<double> support;  // per-class accumulated weight
    int decided = 0;              // argmax of support
};

inline int knn_predict(const Matrix& query, std::span<const GalleryItem> gallery,
                       const KnnConfig& cfg) {
    require(!gallery.empty(), errc::empty_gallery, "knn over empty gallery");
    require(cfg.k >= 1 && cfg.k <= static_cast<int>(gallery.size()),
            errc::bad_argument, "k out of range for gallery size");

    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(gallery.size());
    for (std::size_t i = 0; i < gallery.size(); ++i) {
        const Matrix& candidate = *gallery[i].features;
        require(candidate.same_shape(query), errc::shape_mismatch,
                "gallery feature shape differs from query");
        ranked.emplace_back(matrix_distance(query, candidate, cfg.metric), i);
    }
    const std::size_t k = static_cast<std::size_t>(cfg.k);
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k),
                      ranked.end());  // pair ordering = (distance, gallery index)

    int max_label = 0;
    for (const auto& item : gallery) max_label = std::max(max_label, item.label);
    std::vector<int> counts(static_cast<std::size_t>(max_label) + 1, 0);
    for (std::size_t i = 0; i < k; ++i)
        ++counts[static_cast<std::size_t>(gallery[ranked[i].second].label)];

    const int best_count = *std::max_element(counts.begin(), counts.end());
    const int nearest_label = gallery[ranked.front().second].label;
    if (counts[static_cast<std::size_t>(nearest_label)] == best_count)
        return nearest_label;
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] == best_count) return static_cast<int>(c);
    return nearest_label;  // unreachable
}

// Unweighted majority: one vote per classifier, argmax wins, no majority
// threshold required.
inline VoteTally majority_vote(std::span<const int> votes, int class_count) {
    require(!votes.empty(), errc::no_votes, "no votes to combine");
    require(class_count >= 1, errc::bad_argument, "class_count must be positive");
    VoteTally tally;
    tally.support.assign(static_cast<std::size_t>(class_count), 0.0);
    for (int vote : votes) {
        require(vote >= 0 && vote < class_count, errc::bad_argument,
                "vote outside [0, class_count)");
        tally.support[static_cast<std::size_t>(vote)] += 1.0;
    }
    tally.decided = static_cast<int>(
        std::max_element(tally.support.begin(), tally.support.end()) -
        tally.support.begin());
    return tally;
}

// Weighted majority: the decided class maximizes the weighted support.
inline VoteTally weighted_vote(std::span<const int> votes,
                               std::span<const double> weights, int class_count) {
    require(!votes.empty(), errc::no_votes, "no votes to combine");
    require(votes.size() == weights.size(), errc::length_mismatch,
            "vote/weight counts differ");
    require(class_count >= 1, errc::bad_argument, "class_count must be positive");

    bool any_positive = false;
    for (double w : weights) {
        require(w >= 0.0, errc::bad_argument, "weights must be non-negative");
        any_positive = any_positive || w > 0.0;
    }
    require(any_positive, errc::all_zero_weights, "all classifier weights are zero");

    VoteTally tally;
    tally.support.assign(static_cast<std::size_t>(class_count), 0.0);
    for (std::size_t t = 0; t < votes.size(); ++t) {
        require(votes[t] >= 0 && votes[t] < class_count, errc::bad_argument,
                "vote outside [0, class_count)");
        tally.support[static_cast<std::size_t>(votes[t])] += weights[t];
    }
    tally.decided = static_cast<int>(
        std::max_element(tally.support.begin(), tally.support.end()) -
        tally.support.begin());
    return tally;
}

}  // namespace facekit
