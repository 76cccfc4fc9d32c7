#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "glc/clustering.hpp"
#include "glc/errors.hpp"
#include "glc/metrics.hpp"
#include "glc/rng.hpp"

using namespace glc;

namespace {

EmbeddingSet random_unit_set(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Mat f(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            f(i, j) = rng.normal();
            norm += f(i, j) * f(i, j);
        }
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < d; ++j) f(i, j) /= norm;
    }
    return EmbeddingSet::make(std::move(f), std::nullopt, std::vector<int>(n, 0), std::nullopt);
}

// Independent reference DBSCAN: full boolean neighbor matrix, core flags, then
// BFS over cores with border attachment. Shares no code with the library.
std::vector<int> dbscan_reference(const Mat& f, double eps, int min_pts) {
    const int n = static_cast<int>(f.rows);
    std::vector<std::vector<bool>> near(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < f.cols; ++t) s += f(i, t) * f(j, t);
            near[i][j] = (1.0 - s) <= eps;
        }
    std::vector<bool> core(n, false);
    for (int i = 0; i < n; ++i) {
        int cnt = 0;
        for (int j = 0; j < n; ++j) cnt += near[i][j];
        core[i] = cnt >= min_pts;
    }
    std::vector<int> label(n, -1);
    std::vector<bool> claimed(n, false);
    int cluster = 0;
    for (int i = 0; i < n; ++i) {
        if (!core[i] || claimed[i]) continue;
        // BFS over density-connected cores
        std::vector<int> stack{i};
        claimed[i] = true;
        label[i] = cluster;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int j = 0; j < n; ++j) {
                if (!near[v][j]) continue;
                if (core[j] && !claimed[j]) {
                    claimed[j] = true;
                    label[j] = cluster;
                    stack.push_back(j);
                } else if (!core[j] && label[j] < 0 && !claimed[j]) {
                    // border point: first cluster to reach it wins; the
                    // library walks clusters in ascending seed order, and
                    // within a cluster any core reaches it, so the claim
                    // order matches
                    label[j] = cluster;
                }
            }
        }
        ++cluster;
    }
    return label;
}

// partitions equal as set systems, and the noise sets identical
bool same_partition_and_noise(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, std::set<std::size_t>> ca, cb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] < 0) != (b[i] < 0)) return false;
        if (a[i] >= 0) ca[a[i]].insert(i);
        if (b[i] >= 0) cb[b[i]].insert(i);
    }
    std::set<std::set<std::size_t>> sa, sb;
    for (auto& [_, s] : ca) sa.insert(s);
    for (auto& [_, s] : cb) sb.insert(s);
    return sa == sb;
}

}  // namespace

TEST_CASE("dbscan: identical points form one cluster without outliers") {
    Mat f(6, 3);
    for (std::size_t i = 0; i < 6; ++i) f(i, 0) = 1.0;
    const auto set = EmbeddingSet::make(std::move(f), std::nullopt, std::vector<int>(6, 0), std::nullopt);
    const Labeling lab = dbscan(set, {0.1, 4});
    CHECK(lab.n_clusters == 1);
    CHECK(lab.n_outliers() == 0);
}

TEST_CASE("dbscan: an isolated point becomes noise") {
    Mat f(5, 2);
    for (std::size_t i = 0; i < 4; ++i) f(i, 0) = 1.0;
    f(4, 1) = 1.0;  // orthogonal, cosine distance 1
    const auto set = EmbeddingSet::make(std::move(f), std::nullopt, std::vector<int>(5, 0), std::nullopt);
    const Labeling lab = dbscan(set, {0.3, 2});
    CHECK(lab.labels[4] == -1);
    CHECK(lab.n_clusters == 1);
}

TEST_CASE("dbscan matches the brute-force reference on random instances") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const EmbeddingSet set = random_unit_set(50, 5, 200 + seed);
        const Labeling got = dbscan(set, {0.3, 4});
        const std::vector<int> want = dbscan_reference(set.features, 0.3, 4);
        CHECK(same_partition_and_noise(got.labels, want));
    }
}

TEST_CASE("dbscan is permutation-equivariant as a partition") {
    const EmbeddingSet set = random_unit_set(40, 4, 77);
    const Labeling lab = dbscan(set, {0.35, 3});

    // reverse the rows
    Mat rev(set.features.rows, set.features.cols);
    for (std::size_t i = 0; i < rev.rows; ++i)
        std::copy_n(set.features.row(rev.rows - 1 - i), rev.cols, rev.row(i));
    const auto rset =
        EmbeddingSet::make(std::move(rev), std::nullopt, std::vector<int>(40, 0), std::nullopt);
    const Labeling rlab = dbscan(rset, {0.35, 3});

    std::vector<int> unreversed(rlab.labels.rbegin(), rlab.labels.rend());
    CHECK(same_partition_and_noise(lab.labels, unreversed));
}

TEST_CASE("kmeans boundary cases") {
    const EmbeddingSet set = random_unit_set(12, 4, 55);
    const Labeling one = kmeans(set, 1, 9);
    CHECK(one.n_clusters == 1);
    CHECK(one.n_outliers() == 0);

    const Labeling all = kmeans(set, 12, 9);
    CHECK(all.n_clusters == 12);  // every point its own cluster
}

TEST_CASE("kmeans recovers two well-separated blobs") {
    // separation 10x the spread
    Rng rng(66);
    const std::size_t d = 4, per = 20;
    Mat f(2 * per, d);
    std::vector<int> gt(2 * per);
    for (std::size_t i = 0; i < 2 * per; ++i) {
        const int blob = i < per ? 0 : 1;
        gt[i] = blob;
        double row[4] = {blob == 0 ? 1.0 : -1.0, blob == 0 ? 0.3 : -0.3, 0.0, 0.0};
        double norm = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            row[j] += 0.02 * rng.normal();
            norm += row[j] * row[j];
        }
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < d; ++j) f(i, j) = row[j] / norm;
    }
    const auto set = EmbeddingSet::make(std::move(f), std::nullopt, std::vector<int>(2 * per, 0), gt);
    const Labeling lab = kmeans(set, 2, 4);
    CHECK(nmi(lab, gt) == 1.0);
}

TEST_CASE("kmeans objective is non-increasing") {
    const EmbeddingSet set = random_unit_set(60, 5, 88);
    std::vector<double> objective;
    kmeans(set, 5, 3, &objective);
    REQUIRE(objective.size() >= 2);
    for (std::size_t i = 1; i < objective.size(); ++i) CHECK(objective[i] <= objective[i - 1] + 1e-12);
}

TEST_CASE("kmeans validates k") {
    const EmbeddingSet set = random_unit_set(5, 3, 2);
    CHECK_THROWS_AS(kmeans(set, 0, 1), ValidationError);
    CHECK_THROWS_AS(kmeans(set, 6, 1), ValidationError);
}

TEST_CASE("corrupt_labels: zero rates are the identity") {
    const Labeling lab({0, 1, 2, 0, 1, 2, -1});
    const Labeling out = corrupt_labels(lab, 0.0, 0.0, 5);
    CHECK(out == lab);
}

TEST_CASE("corrupt_labels: full flip on two clusters is a permutation") {
    std::vector<int> raw(10);
    for (std::size_t i = 0; i < 10; ++i) raw[i] = static_cast<int>(i % 2);
    const Labeling lab(std::move(raw));
    const Labeling out = corrupt_labels(lab, 1.0, 0.0, 5);
    // with 2 clusters every flip lands on the other cluster: every label
    // changes but the partition is untouched
    for (std::size_t i = 0; i < 10; ++i) CHECK(out.labels[i] == 1 - lab.labels[i]);
    CHECK(nmi(out, lab.labels) == 1.0);
}

TEST_CASE("corrupt_labels: exact corruption counts") {
    std::vector<int> raw(600);
    for (std::size_t i = 0; i < 600; ++i) raw[i] = static_cast<int>(i % 30);
    const Labeling lab(raw);
    const Labeling out = corrupt_labels(lab, 0.2, 0.1, 123);

    std::size_t flips = 0, outliers = 0;
    for (std::size_t i = 0; i < 600; ++i) {
        if (out.labels[i] < 0) ++outliers;
        else if (out.labels[i] != lab.labels[i]) ++flips;
    }
    CHECK(outliers == 60);  // floor(0.1 * 600)
    CHECK(flips == 120);    // floor(0.2 * 600)
}

TEST_CASE("corrupt_labels is deterministic and validates inputs") {
    std::vector<int> raw(50);
    for (std::size_t i = 0; i < 50; ++i) raw[i] = static_cast<int>(i % 5);
    const Labeling lab(raw);
    CHECK(corrupt_labels(lab, 0.3, 0.2, 9) == corrupt_labels(lab, 0.3, 0.2, 9));
    CHECK(!(corrupt_labels(lab, 0.3, 0.2, 9) == corrupt_labels(lab, 0.3, 0.2, 10)));

    CHECK_THROWS_AS(corrupt_labels(lab, -0.1, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(corrupt_labels(Labeling({0, 0, 0}), 0.5, 0.0, 1), ValidationError);
}
