#pragma once

#include <cstdint>
#include <vector>

#include "glc/config.hpp"
#include "glc/dataset.hpp"
#include "glc/glc_net.hpp"
#include "glc/knn_graph.hpp"

namespace glc {

struct CorrectionResult {
    Labeling corrected;
    std::size_t edges_removed_conf = 0;
    std::size_t edges_removed_nc = 0;
    int n_outliers_before = 0;
    int n_outliers_after = 0;
    TrainReport train_report;
};

// One full correction pass:
//   1. joint similarity over all samples;
//   2. training graph without outlier nodes, inference graph over all nodes;
//   3. fresh-initialized network trained on the training graph for t_e steps;
//   4. edge confidences on the inference graph, edges with p < tau1 removed;
//   5. node-connectivity pruning (NC < tau2) on the tau1-pruned graph;
//   6. connected components; isolated former outliers stay -1, isolated
//      previously-labeled nodes become singleton clusters.
CorrectionResult correct(const EmbeddingSet& set, const Labeling& lab, const RunConfig& cfg,
                         std::uint64_t seed);

// NMI surface over a (tau1, tau2) grid against set.gt_labels. The model is
// trained once; thresholds only affect inference. Result is indexed
// [tau1_index * tau2s.size() + tau2_index].
Mat threshold_grid(const EmbeddingSet& set, const Labeling& lab, const RunConfig& cfg,
                   const std::vector<double>& tau1s, const std::vector<double>& tau2s);

}  // namespace glc
