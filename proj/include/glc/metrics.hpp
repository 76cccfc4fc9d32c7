#pragma once

#include <optional>
#include <vector>

#include "glc/dataset.hpp"

namespace glc {

struct KnnGraph;

struct MetricReport {
    double nmi = 0.0;
    double pair_precision = 0.0;
    double pair_recall = 0.0;
    double pair_f = 0.0;
    int n_outliers = 0;
    std::optional<double> graph_recall;
    std::optional<double> map;
};

// Normalized mutual information, 2*I/(H_U + H_V) with natural logs. Prediction
// outliers count as singleton clusters. Identical partitions score 1 (also in
// the all-singleton and single-cluster cases); if either side has zero entropy
// and the partitions differ, the score is 0.
double nmi(const Labeling& pred, const std::vector<int>& gt);

struct PairCounts {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

// Pairwise precision/recall/F over all unordered sample pairs. Outliers are
// singletons and never pair with anything. Empty numerator conventions:
// precision 1 when there are no same-pred pairs, recall 1 when gt has no
// positive pairs, f 0 when both are 0.
PairCounts pairwise_prf(const Labeling& pred, const std::vector<int>& gt);

// Fraction of same-identity ground-truth pairs connected by a graph edge.
// Throws ValidationError when gt has no positive pairs.
double graph_recall(const KnnGraph& g, const std::vector<int>& gt);

// Mean average precision of cosine-similarity retrieval; gallery ranked per
// query, ties broken by lower gallery index. Every query identity must appear
// in the gallery.
double retrieval_map(const Mat& query_features, const std::vector<int>& query_gt,
                     const Mat& gallery_features, const std::vector<int>& gallery_gt);

// Leave-one-out mAP over one embedding set: each sample queries all others.
double retrieval_map_loo(const Mat& features, const std::vector<int>& gt);

MetricReport evaluate(const Labeling& pred, const std::vector<int>& gt);

}  // namespace glc
