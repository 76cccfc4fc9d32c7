#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "glc/errors.hpp"
#include "glc/knn_graph.hpp"
#include "glc/metrics.hpp"
#include "glc/rng.hpp"

using namespace glc;

namespace {

// Independent scalar-arithmetic NMI: explicit contingency counts, entropies
// from explicit sums. Outliers in pred become singletons first.
double nmi_oracle(std::vector<int> pred, const std::vector<int>& gt) {
    int next = 0;
    for (int v : pred) next = std::max(next, v + 1);
    for (int& v : pred)
        if (v < 0) v = next++;

    const double n = static_cast<double>(pred.size());
    std::map<int, int> ca, cb;
    std::map<std::pair<int, int>, int> cab;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ++ca[pred[i]];
        ++cb[gt[i]];
        ++cab[{pred[i], gt[i]}];
    }
    double hu = 0.0, hv = 0.0, mi = 0.0;
    for (auto& [_, c] : ca) hu -= c / n * std::log(c / n);
    for (auto& [_, c] : cb) hv -= c / n * std::log(c / n);
    for (auto& [key, c] : cab)
        mi += c / n * std::log(n * c / (static_cast<double>(ca[key.first]) * cb[key.second]));
    if (hu == 0.0 && hv == 0.0) return 1.0;
    if (hu == 0.0 || hv == 0.0) return 0.0;
    return 2.0 * mi / (hu + hv);
}

// O(N^2) pair enumeration.
void prf_oracle(const std::vector<int>& pred, const std::vector<int>& gt, double& p, double& r,
                double& f) {
    long tp = 0, same_pred = 0, same_gt = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = i + 1; j < pred.size(); ++j) {
            const bool sp = pred[i] >= 0 && pred[i] == pred[j];
            const bool sg = gt[i] == gt[j];
            same_pred += sp;
            same_gt += sg;
            tp += sp && sg;
        }
    }
    p = same_pred == 0 ? 1.0 : static_cast<double>(tp) / same_pred;
    r = same_gt == 0 ? 1.0 : static_cast<double>(tp) / same_gt;
    f = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
}

KnnGraph random_graph(std::size_t n, double p_edge, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<int, int>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < p_edge) edges.emplace_back(i, j);
    return KnnGraph::from_edges(n, 1, edges, std::vector<double>(edges.size(), 1.0),
                                std::vector<char>(n, 1));
}

}  // namespace

TEST_CASE("nmi is 1 for identical partitions in all degenerate shapes") {
    CHECK(nmi(Labeling({0, 0, 1, 1}), {5, 5, 9, 9}) == 1.0);
    CHECK(nmi(Labeling({0, 1, 2}), {0, 1, 2}) == 1.0);          // all singletons
    CHECK(nmi(Labeling({0, 0, 0}), {4, 4, 4}) == 1.0);          // single cluster
    CHECK(nmi(Labeling({-1, -1, 0}), {0, 1, 2}) == 1.0);        // outliers as singletons
}

TEST_CASE("nmi is 0 when one side has zero entropy and partitions differ") {
    CHECK(nmi(Labeling({0, 0, 0, 0}), {0, 0, 1, 1}) == 0.0);
    CHECK(nmi(Labeling({0, 0, 1, 1}), {3, 3, 3, 3}) == 0.0);
}

TEST_CASE("nmi matches the entropy-formula oracle") {
    CHECK(nmi(Labeling({0, 0, 1, 1}), {0, 0, 0, 1}) ==
          doctest::Approx(nmi_oracle({0, 0, 1, 1}, {0, 0, 0, 1})).epsilon(1e-12));

    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + rng.uniform_below(40);
        std::vector<int> pred(n), gt(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = static_cast<int>(rng.uniform_below(5)) - 1;  // may contain -1
            gt[i] = static_cast<int>(rng.uniform_below(4));
        }
        CHECK(nmi(Labeling(pred), gt) == doctest::Approx(nmi_oracle(pred, gt)).epsilon(1e-10));
    }
}

TEST_CASE("nmi is invariant to label permutation") {
    const std::vector<int> gt{0, 1, 1, 2, 2, 2, 0};
    const Labeling a({2, 0, 0, 1, 1, 1, 2});
    const Labeling b({0, 2, 2, 1, 1, 1, 0});
    CHECK(nmi(a, gt) == doctest::Approx(nmi(b, gt)).epsilon(1e-15));
}

TEST_CASE("nmi validates inputs") {
    CHECK_THROWS_AS(nmi(Labeling({0, 1}), {0, 1, 2}), ValidationError);
    CHECK_THROWS_AS(nmi(Labeling({0, 1}), {0, -1}), ValidationError);
}

TEST_CASE("pairwise metrics: identity and all-singleton conventions") {
    const std::vector<int> gt{0, 0, 1, 1};
    const PairCounts same = pairwise_prf(Labeling({5, 5, 9, 9}), gt);
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);
    CHECK(same.f == 1.0);

    const PairCounts singletons = pairwise_prf(Labeling({0, 1, 2, 3}), gt);
    CHECK(singletons.precision == 1.0);  // vacuous numerator
    CHECK(singletons.recall == 0.0);
    CHECK(singletons.f == 0.0);
}

TEST_CASE("pairwise metrics match the pair-enumeration oracle") {
    Rng rng(32);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<int> pred(20), gt(20);
        for (std::size_t i = 0; i < 20; ++i) {
            pred[i] = static_cast<int>(rng.uniform_below(6)) - 1;
            gt[i] = static_cast<int>(rng.uniform_below(4));
        }
        double p, r, f;
        prf_oracle(Labeling(pred).labels, gt, p, r, f);
        const PairCounts got = pairwise_prf(Labeling(pred), gt);
        CHECK(got.precision == doctest::Approx(p).epsilon(1e-12));
        CHECK(got.recall == doctest::Approx(r).epsilon(1e-12));
        CHECK(got.f == doctest::Approx(f).epsilon(1e-12));
    }
}

TEST_CASE("graph recall: complete is 1, edgeless is 0, random matches oracle") {
    std::vector<int> gt(8);
    for (std::size_t i = 0; i < 8; ++i) gt[i] = static_cast<int>(i / 2);

    std::vector<std::pair<int, int>> all_edges;
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j) all_edges.emplace_back(i, j);
    const KnnGraph complete = KnnGraph::from_edges(8, 7, all_edges,
                                                   std::vector<double>(all_edges.size(), 1.0),
                                                   std::vector<char>(8, 1));
    CHECK(graph_recall(complete, gt) == 1.0);

    const KnnGraph empty = KnnGraph::from_edges(8, 1, {}, {}, std::vector<char>(8, 1));
    CHECK(graph_recall(empty, gt) == 0.0);

    Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const KnnGraph g = random_graph(12, 0.3, 100 + trial);
        std::vector<int> labels(12);
        for (auto& v : labels) v = static_cast<int>(rng.uniform_below(3));
        long hit = 0, total = 0;
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = i + 1; j < 12; ++j) {
                if (labels[i] != labels[j]) continue;
                ++total;
                const auto edge = std::make_pair(static_cast<int>(i), static_cast<int>(j));
                hit += std::binary_search(g.edges.begin(), g.edges.end(), edge);
            }
        if (total == 0) continue;
        CHECK(graph_recall(g, labels) ==
              doctest::Approx(static_cast<double>(hit) / total).epsilon(1e-12));
    }
}

TEST_CASE("graph recall is monotone under edge addition") {
    std::vector<int> gt{0, 0, 0, 1, 1, 1};
    std::vector<std::pair<int, int>> edges{{0, 1}};
    double prev = graph_recall(KnnGraph::from_edges(6, 1, edges, {1.0}, std::vector<char>(6, 1)), gt);
    for (auto e : std::vector<std::pair<int, int>>{{1, 2}, {3, 4}, {0, 5}, {4, 5}}) {
        edges.push_back(e);
        const double cur = graph_recall(
            KnnGraph::from_edges(6, 1, edges, std::vector<double>(edges.size(), 1.0),
                                 std::vector<char>(6, 1)),
            gt);
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("graph recall without positive gt pairs is an error") {
    const KnnGraph g = random_graph(4, 0.5, 9);
    CHECK_THROWS_AS(graph_recall(g, {0, 1, 2, 3}), ValidationError);
}

TEST_CASE("retrieval map: analytic cases") {
    // gallery = duplicates of the query ranked first -> AP 1
    Mat q(1, 2);
    q(0, 0) = 1.0;
    Mat g(4, 2);
    g(0, 0) = 1.0;                   // same identity, sim 1
    g(1, 0) = 0.9; g(1, 1) = std::sqrt(1 - 0.81);
    g(2, 1) = 1.0;
    g(3, 0) = -1.0;
    CHECK(retrieval_map(q, {7}, g, {7, 1, 2, 3}) == 1.0);

    // single relevant item at rank k of n -> AP = 1/k
    CHECK(retrieval_map(q, {2}, g, {9, 8, 2, 5}) == doctest::Approx(1.0 / 3).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(retrieval_map(q, {42}, g, {1, 2, 3, 4}), doctest::Contains("query 0"),
                         ValidationError);
}

TEST_CASE("retrieval map matches a per-query oracle on random data") {
    Rng rng(34);
    const std::size_t nq = 10, ng = 25, d = 6;
    Mat qf(nq, d), gf(ng, d);
    for (double& v : qf.data) v = rng.normal();
    for (double& v : gf.data) v = rng.normal();
    std::vector<int> qgt(nq), ggt(ng);
    for (auto& v : qgt) v = static_cast<int>(rng.uniform_below(4));
    for (std::size_t i = 0; i < ng; ++i) ggt[i] = static_cast<int>(i % 4);

    double want = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
        std::vector<std::pair<double, std::size_t>> ranked;
        for (std::size_t i = 0; i < ng; ++i) {
            double s = 0.0;
            for (std::size_t t = 0; t < d; ++t) s += qf(q, t) * gf(i, t);
            ranked.emplace_back(s, i);
        }
        std::sort(ranked.begin(), ranked.end(), [](auto& a, auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        double ap = 0.0;
        int hits = 0, relevant = 0;
        for (std::size_t i = 0; i < ng; ++i) relevant += ggt[i] == qgt[q];
        for (std::size_t pos = 0; pos < ng; ++pos) {
            if (ggt[ranked[pos].second] == qgt[q]) {
                ++hits;
                ap += static_cast<double>(hits) / static_cast<double>(pos + 1);
            }
        }
        want += ap / relevant;
    }
    want /= static_cast<double>(nq);
    CHECK(retrieval_map(qf, qgt, gf, ggt) == doctest::Approx(want).epsilon(1e-12));
}
