#pragma once

#include <cstdint>
#include <vector>

#include "glc/dataset.hpp"

namespace glc {

struct DbscanParams {
    double eps = 0.4;  // cosine distance radius, 1 - cosine similarity
    int min_pts = 4;

    void validate() const;
};

// Classic DBSCAN on cosine distance over unit-normalized features. A point's
// eps-neighborhood includes the point itself; core points have >= min_pts
// neighbors; density-reachable points share a label; noise is -1. Expansion
// order is ascending sample index, which fixes all ties.
Labeling dbscan(const EmbeddingSet& set, const DbscanParams& params);

// Lloyd's algorithm with seeded farthest-point initialization. Stops when
// assignments stop changing or after 100 iterations. An emptied cluster is
// re-seeded to the point farthest from its assigned centroid. If
// objective_history is non-null it receives the sum of squared distances after
// each assignment step.
Labeling kmeans(const EmbeddingSet& set, int k, std::uint64_t seed,
                std::vector<double>* objective_history = nullptr);

// Test fixture: flips floor(flip_rate * n_labeled) labeled samples to a
// uniformly random different cluster and marks floor(outlier_rate * n_labeled)
// further labeled samples as -1; the two index sets are disjoint.
Labeling corrupt_labels(const Labeling& lab, double flip_rate, double outlier_rate, std::uint64_t seed);

}  // namespace glc
