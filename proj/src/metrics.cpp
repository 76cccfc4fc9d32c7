#include "glc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "glc/errors.hpp"
#include "glc/kernels.hpp"
#include "glc/knn_graph.hpp"

namespace glc {

namespace {

// Outliers become fresh singleton ids past the cluster range.
std::vector<int> expand_outliers(const Labeling& pred) {
    std::vector<int> out = pred.labels;
    int next = pred.n_clusters;
    for (int& v : out)
        if (v < 0) v = next++;
    return out;
}

// First-appearance normal form; two labelings describe the same partition iff
// their normal forms are equal.
std::vector<int> normal_form(const std::vector<int>& labels) {
    std::vector<int> out(labels.size());
    std::unordered_map<int, int> seen;
    seen.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = seen.find(labels[i]);
        if (it == seen.end()) it = seen.emplace(labels[i], static_cast<int>(seen.size())).first;
        out[i] = it->second;
    }
    return out;
}

std::vector<std::int64_t> cluster_sizes(const std::vector<int>& labels) {
    int k = 0;
    for (int v : labels) k = std::max(k, v + 1);
    std::vector<std::int64_t> sizes(k, 0);
    for (int v : labels) ++sizes[v];
    return sizes;
}

double entropy(const std::vector<std::int64_t>& sizes, double n) {
    double h = 0.0;
    for (std::int64_t s : sizes) {
        if (s > 0) {
            const double p = s / n;
            h -= p * std::log(p);
        }
    }
    return h;
}

std::int64_t pairs2(std::int64_t m) { return m * (m - 1) / 2; }

}  // namespace

double nmi(const Labeling& pred, const std::vector<int>& gt) {
    if (pred.size() != gt.size()) throw ValidationError("nmi: length mismatch");
    for (int v : gt)
        if (v < 0) throw ValidationError("nmi: gt must not contain -1");
    if (pred.size() == 0) throw ValidationError("nmi: empty input");

    const std::vector<int> u = normal_form(expand_outliers(pred));
    const std::vector<int> v = normal_form(gt);
    if (u == v) return 1.0;

    const double n = static_cast<double>(u.size());
    const auto a = cluster_sizes(u);
    const auto b = cluster_sizes(v);
    const double hu = entropy(a, n);
    const double hv = entropy(b, n);
    if (hu == 0.0 || hv == 0.0) return 0.0;

    // contingency counts via sorted (u, v) pairs
    std::vector<std::pair<int, int>> cells(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) cells[i] = {u[i], v[i]};
    std::sort(cells.begin(), cells.end());
    double mi = 0.0;
    for (std::size_t i = 0; i < cells.size();) {
        std::size_t j = i;
        while (j < cells.size() && cells[j] == cells[i]) ++j;
        const double nij = static_cast<double>(j - i);
        mi += nij / n * std::log(n * nij / (static_cast<double>(a[cells[i].first]) * b[cells[i].second]));
        i = j;
    }
    return std::clamp(2.0 * mi / (hu + hv), 0.0, 1.0);
}

PairCounts pairwise_prf(const Labeling& pred, const std::vector<int>& gt) {
    if (pred.size() != gt.size()) throw ValidationError("pairwise_prf: length mismatch");

    const std::vector<int> u = normal_form(expand_outliers(pred));
    const std::vector<int> v = normal_form(gt);
    const auto a = cluster_sizes(u);
    const auto b = cluster_sizes(v);

    std::int64_t same_pred = 0, same_gt = 0, same_both = 0;
    for (std::int64_t s : a) same_pred += pairs2(s);
    for (std::int64_t s : b) same_gt += pairs2(s);
    std::vector<std::pair<int, int>> cells(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) cells[i] = {u[i], v[i]};
    std::sort(cells.begin(), cells.end());
    for (std::size_t i = 0; i < cells.size();) {
        std::size_t j = i;
        while (j < cells.size() && cells[j] == cells[i]) ++j;
        same_both += pairs2(static_cast<std::int64_t>(j - i));
        i = j;
    }

    PairCounts pc;
    pc.precision = same_pred == 0 ? 1.0 : static_cast<double>(same_both) / static_cast<double>(same_pred);
    pc.recall = same_gt == 0 ? 1.0 : static_cast<double>(same_both) / static_cast<double>(same_gt);
    pc.f = (pc.precision + pc.recall) > 0.0 ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall) : 0.0;
    return pc;
}

double graph_recall(const KnnGraph& g, const std::vector<int>& gt) {
    if (gt.size() != g.n) throw ValidationError("graph_recall: gt length != node count");
    std::int64_t total = 0;
    const auto sizes = cluster_sizes(normal_form(gt));
    for (std::int64_t s : sizes) total += pairs2(s);
    if (total == 0) throw ValidationError("graph_recall: gt has no positive pairs");
    std::int64_t hit = 0;
    for (const auto& [i, j] : g.edges)
        if (gt[i] == gt[j]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(total);
}

double retrieval_map(const Mat& query_features, const std::vector<int>& query_gt,
                     const Mat& gallery_features, const std::vector<int>& gallery_gt) {
    if (query_features.rows != query_gt.size() || gallery_features.rows != gallery_gt.size())
        throw ValidationError("retrieval_map: feature/gt length mismatch");
    if (query_features.cols != gallery_features.cols)
        throw ValidationError("retrieval_map: dimension mismatch");

    const std::size_t ng = gallery_features.rows;
    double ap_sum = 0.0;
    std::vector<std::pair<double, std::size_t>> ranked(ng);
    for (std::size_t q = 0; q < query_features.rows; ++q) {
        std::int64_t relevant = 0;
        for (std::size_t i = 0; i < ng; ++i) {
            ranked[i] = {kernels::dot(query_features.row(q), gallery_features.row(i), query_features.cols), i};
            if (gallery_gt[i] == query_gt[q]) ++relevant;
        }
        if (relevant == 0)
            throw ValidationError("retrieval_map: query " + std::to_string(q) + " has no gallery match");
        std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return x.second < y.second;
        });
        double ap = 0.0;
        std::int64_t hits = 0;
        for (std::size_t pos = 0; pos < ng; ++pos) {
            if (gallery_gt[ranked[pos].second] == query_gt[q]) {
                ++hits;
                ap += static_cast<double>(hits) / static_cast<double>(pos + 1);
            }
        }
        ap_sum += ap / static_cast<double>(relevant);
    }
    return ap_sum / static_cast<double>(query_features.rows);
}

double retrieval_map_loo(const Mat& features, const std::vector<int>& gt) {
    const std::size_t n = features.rows;
    if (n != gt.size()) throw ValidationError("retrieval_map_loo: length mismatch");
    double ap_sum = 0.0;
    std::size_t n_queries = 0;
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(n - 1);
    for (std::size_t q = 0; q < n; ++q) {
        std::int64_t relevant = 0;
        ranked.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (i == q) continue;
            ranked.emplace_back(kernels::dot(features.row(q), features.row(i), features.cols), i);
            if (gt[i] == gt[q]) ++relevant;
        }
        if (relevant == 0) continue;  // identity appears once, no retrievable match
        std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return x.second < y.second;
        });
        double ap = 0.0;
        std::int64_t hits = 0;
        for (std::size_t pos = 0; pos < ranked.size(); ++pos) {
            if (gt[ranked[pos].second] == gt[q]) {
                ++hits;
                ap += static_cast<double>(hits) / static_cast<double>(pos + 1);
            }
        }
        ap_sum += ap / static_cast<double>(relevant);
        ++n_queries;
    }
    if (n_queries == 0) throw ValidationError("retrieval_map_loo: no query has a same-identity match");
    return ap_sum / static_cast<double>(n_queries);
}

MetricReport evaluate(const Labeling& pred, const std::vector<int>& gt) {
    MetricReport r;
    r.nmi = nmi(pred, gt);
    const PairCounts pc = pairwise_prf(pred, gt);
    r.pair_precision = pc.precision;
    r.pair_recall = pc.recall;
    r.pair_f = pc.f;
    r.n_outliers = pred.n_outliers();
    return r;
}

}  // namespace glc
