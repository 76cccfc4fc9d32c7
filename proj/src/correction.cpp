#include "glc/correction.hpp"

#include <algorithm>

#include "glc/errors.hpp"
#include "glc/metrics.hpp"

namespace glc {

namespace {

// Pruned copy of `g` keeping edges where keep[e] is true.
KnnGraph prune(const KnnGraph& g, const std::vector<char>& keep) {
    std::vector<std::pair<int, int>> edges;
    std::vector<double> sims;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (keep[e]) {
            edges.push_back(g.edges[e]);
            sims.push_back(g.edge_sim[e]);
        }
    }
    return KnnGraph::from_edges(g.n, g.k, std::move(edges), std::move(sims), g.node_mask);
}

// Steps 4-6 given per-edge confidences on the inference graph.
Labeling apply_pruning(const KnnGraph& infer_graph, const std::vector<double>& conf, const Labeling& lab,
                       double tau1, double tau2, std::size_t* removed_conf, std::size_t* removed_nc) {
    std::vector<char> keep(infer_graph.edges.size());
    std::size_t n_removed = 0;
    for (std::size_t e = 0; e < conf.size(); ++e) {
        keep[e] = conf[e] >= tau1;
        if (!keep[e]) ++n_removed;
    }
    if (removed_conf) *removed_conf = n_removed;
    KnnGraph pruned = prune(infer_graph, keep);

    // NC is evaluated on the confidence-pruned graph
    std::vector<char> keep_nc(pruned.edges.size());
    n_removed = 0;
    for (std::size_t e = 0; e < pruned.edges.size(); ++e) {
        keep_nc[e] = node_connectivity(pruned, pruned.edges[e].first, pruned.edges[e].second) >= tau2;
        if (!keep_nc[e]) ++n_removed;
    }
    if (removed_nc) *removed_nc = n_removed;
    KnnGraph refined = prune(pruned, keep_nc);

    Labeling comps = connected_components(refined);
    // isolated nodes: former outliers stay -1, previously-labeled nodes become
    // singleton clusters (handled by keeping their component label)
    std::vector<int> out = comps.labels;
    for (std::size_t i = 0; i < refined.n; ++i) {
        if (refined.degree(static_cast<int>(i)) == 0 && lab.labels[i] < 0) out[i] = -1;
    }
    return Labeling(std::move(out));
}

struct Prepared {
    KnnGraph infer_graph;
    std::vector<double> conf;
    TrainReport report;
};

Prepared train_and_score(const EmbeddingSet& set, const Labeling& lab, const RunConfig& cfg,
                         std::uint64_t seed) {
    if (lab.size() != set.n()) throw ValidationError("correct: labeling length != n");
    if (lab.n_clusters < 2)
        throw ValidationError("correct: need >= 2 clusters among non-outliers (no negative edges to train on)");

    const Mat sim = joint_similarity(set, cfg.lambda);

    std::vector<char> train_mask(set.n());
    for (std::size_t i = 0; i < set.n(); ++i) train_mask[i] = lab.labels[i] >= 0 ? 1 : 0;
    const KnnGraph train_graph = build_knn_graph(sim, cfg.k, train_mask);
    KnnGraph infer_graph = build_knn_graph(sim, cfg.k, std::vector<char>(set.n(), 1));

    auto [model, report] = train_glc(train_graph, set, lab, cfg, seed);

    const CsrMatrix a_hat = normalized_adjacency(infer_graph);
    const Mat h = gcn_forward(model, a_hat, set.features);
    std::vector<double> conf = edge_confidences(model, h, infer_graph.edges);
    return {std::move(infer_graph), std::move(conf), std::move(report)};
}

}  // namespace

CorrectionResult correct(const EmbeddingSet& set, const Labeling& lab, const RunConfig& cfg,
                         std::uint64_t seed) {
    Prepared p = train_and_score(set, lab, cfg, seed);

    CorrectionResult res;
    res.n_outliers_before = lab.n_outliers();
    res.corrected =
        apply_pruning(p.infer_graph, p.conf, lab, cfg.tau1, cfg.tau2, &res.edges_removed_conf,
                      &res.edges_removed_nc);
    res.n_outliers_after = res.corrected.n_outliers();
    res.train_report = std::move(p.report);
    return res;
}

Mat threshold_grid(const EmbeddingSet& set, const Labeling& lab, const RunConfig& cfg,
                   const std::vector<double>& tau1s, const std::vector<double>& tau2s) {
    if (!set.gt_labels) throw ValidationError("threshold_grid: ground-truth labels required");
    for (double t : tau1s)
        if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("threshold_grid: tau1 values must be in [0, 1]");
    for (double t : tau2s)
        if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("threshold_grid: tau2 values must be in [0, 1]");

    Prepared p = train_and_score(set, lab, cfg, cfg.seed);
    Mat surface(tau1s.size(), tau2s.size());
    for (std::size_t a = 0; a < tau1s.size(); ++a) {
        for (std::size_t b = 0; b < tau2s.size(); ++b) {
            const Labeling corrected =
                apply_pruning(p.infer_graph, p.conf, lab, tau1s[a], tau2s[b], nullptr, nullptr);
            surface(a, b) = nmi(corrected, *set.gt_labels);
        }
    }
    return surface;
}

}  // namespace glc
