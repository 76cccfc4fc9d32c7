#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <vector>

#include "glc/clustering.hpp"
#include "glc/correction.hpp"
#include "glc/errors.hpp"
#include "glc/metrics.hpp"
#include "glc/rng.hpp"
#include "glc/selftrain.hpp"

using namespace glc;

namespace {

// Small fast fixture: 10 identities, 15 samples each, warm embeddings with
// scores, mildly corrupted DBSCAN labels.
struct Fixture {
    RawDataset raw;
    EmbeddingSet set;
    Labeling initial;
    RunConfig cfg;
};

Fixture make_fixture(std::uint64_t seed) {
    Fixture fx;
    fx.cfg.n_identities = 10;
    fx.cfg.samples_per_identity = 15;
    fx.cfg.d_raw = 16;
    fx.cfg.d = 16;
    fx.cfg.cluster_spread = 0.3;
    fx.cfg.eps = 0.15;
    fx.cfg.min_pts = 4;
    fx.cfg.k = 10;
    fx.cfg.t_e = 60;
    fx.cfg.inner_steps = 150;
    fx.cfg.seed = seed;
    fx.raw = generate_synthetic(fx.cfg.synth_spec());
    fx.set = warmup_embeddings(fx.raw, fx.cfg, 2, seed);
    const Labeling base = dbscan(fx.set, fx.cfg.dbscan_params());
    fx.initial = corrupt_labels(base, 0.15, 0.08, mix_seed(seed, 1, 7));
    return fx;
}

}  // namespace

TEST_CASE("disabled thresholds reproduce raw graph components") {
    const Fixture fx = make_fixture(3);
    RunConfig cfg = fx.cfg;
    cfg.tau1 = 0.0;
    cfg.tau2 = 0.0;
    const CorrectionResult res = correct(fx.set, fx.initial, cfg, 11);
    CHECK(res.edges_removed_conf == 0);
    CHECK(res.edges_removed_nc == 0);

    const Mat sim = joint_similarity(fx.set, cfg.lambda);
    const KnnGraph raw_graph = build_knn_graph(sim, cfg.k, std::vector<char>(fx.set.n(), 1));
    const Labeling comps = connected_components(raw_graph);
    CHECK(nmi(res.corrected, comps.labels) == 1.0);
    CHECK(res.n_outliers_after == 0);  // k-NN graph leaves nobody isolated
}

TEST_CASE("tau1 above 1 removes every edge") {
    const Fixture fx = make_fixture(4);
    RunConfig cfg = fx.cfg;
    cfg.tau1 = 1.0 + 1e-9;
    const CorrectionResult res = correct(fx.set, fx.initial, cfg, 11);
    // every previously-labeled node is a singleton, former outliers stay -1
    for (std::size_t i = 0; i < fx.set.n(); ++i) {
        if (fx.initial.labels[i] < 0) CHECK(res.corrected.labels[i] == -1);
        else CHECK(res.corrected.labels[i] >= 0);
    }
    CHECK(res.corrected.n_clusters ==
          static_cast<int>(fx.set.n()) - fx.initial.n_outliers());
    CHECK(res.n_outliers_after == res.n_outliers_before);
}

TEST_CASE("correction improves corrupted labels on the small fixture") {
    const Fixture fx = make_fixture(5);
    const CorrectionResult res = correct(fx.set, fx.initial, fx.cfg, 12);
    const double before = nmi(fx.initial, fx.raw.gt_labels);
    const double after = nmi(res.corrected, fx.raw.gt_labels);
    CHECK(after > before);
    CHECK(res.n_outliers_after <= res.n_outliers_before);
    CHECK(res.train_report.iterations == fx.cfg.t_e);
}

TEST_CASE("pruning counts are monotone in the thresholds") {
    const Fixture fx = make_fixture(6);
    std::size_t prev_conf = 0;
    for (double tau1 : {0.0, 0.3, 0.6, 0.9, 1.01}) {
        RunConfig cfg = fx.cfg;
        cfg.tau1 = tau1;
        cfg.tau2 = 0.0;
        const CorrectionResult res = correct(fx.set, fx.initial, cfg, 13);
        CHECK(res.edges_removed_conf >= prev_conf);
        prev_conf = res.edges_removed_conf;
    }

    std::size_t prev_nc = 0;
    for (double tau2 : {0.0, 0.3, 0.6, 1.0}) {
        RunConfig cfg = fx.cfg;
        cfg.tau1 = 0.0;
        cfg.tau2 = tau2;
        const CorrectionResult res = correct(fx.set, fx.initial, cfg, 13);
        CHECK(res.edges_removed_nc >= prev_nc);
        prev_nc = res.edges_removed_nc;
    }
}

TEST_CASE("previously labeled nodes are never output as outliers") {
    const Fixture fx = make_fixture(7);
    for (double tau1 : {0.4, 0.6, 0.95}) {
        RunConfig cfg = fx.cfg;
        cfg.tau1 = tau1;
        const CorrectionResult res = correct(fx.set, fx.initial, cfg, 14);
        for (std::size_t i = 0; i < fx.set.n(); ++i) {
            if (fx.initial.labels[i] >= 0) CHECK(res.corrected.labels[i] >= 0);
        }
        CHECK(res.n_outliers_after <= res.n_outliers_before);
    }
}

TEST_CASE("correction is deterministic given inputs and seed") {
    const Fixture fx = make_fixture(8);
    const CorrectionResult a = correct(fx.set, fx.initial, fx.cfg, 15);
    const CorrectionResult b = correct(fx.set, fx.initial, fx.cfg, 15);
    CHECK(a.corrected == b.corrected);
    CHECK(a.edges_removed_conf == b.edges_removed_conf);
    CHECK(a.edges_removed_nc == b.edges_removed_nc);
    CHECK(a.train_report.loss == b.train_report.loss);
}

TEST_CASE("correction depends only on the input partition, not its ids") {
    const Fixture fx = make_fixture(9);
    const CorrectionResult a = correct(fx.set, fx.initial, fx.cfg, 16);

    // relabel input clusters by a permutation
    std::vector<int> perm(fx.initial.n_clusters);
    std::iota(perm.begin(), perm.end(), 0);
    std::rotate(perm.begin(), perm.begin() + 1, perm.end());
    std::vector<int> relabeled = fx.initial.labels;
    for (int& v : relabeled)
        if (v >= 0) v = perm[v];
    const CorrectionResult b = correct(fx.set, Labeling(relabeled), fx.cfg, 16);
    // component labels are assigned by smallest node index, so identical
    // partitions come back as identical labelings
    CHECK(a.corrected == b.corrected);
}

TEST_CASE("degenerate inputs are rejected") {
    const Fixture fx = make_fixture(10);
    CHECK_THROWS_AS(correct(fx.set, Labeling(std::vector<int>(fx.set.n(), 0)), fx.cfg, 17),
                    ValidationError);

    EmbeddingSet no_scores = fx.set;
    no_scores.scores.reset();
    CHECK_THROWS_AS(correct(no_scores, fx.initial, fx.cfg, 17), ValidationError);
}

TEST_CASE("threshold grid: singleton cell equals a plain correction run") {
    const Fixture fx = make_fixture(11);
    const Mat surface = threshold_grid(fx.set, fx.initial, fx.cfg, {fx.cfg.tau1}, {fx.cfg.tau2});
    REQUIRE(surface.rows == 1);
    REQUIRE(surface.cols == 1);
    const CorrectionResult res = correct(fx.set, fx.initial, fx.cfg, fx.cfg.seed);
    CHECK(surface(0, 0) == doctest::Approx(nmi(res.corrected, *fx.set.gt_labels)).epsilon(1e-15));
}

TEST_CASE("threshold grid validates its inputs") {
    const Fixture fx = make_fixture(12);
    CHECK_THROWS_AS(threshold_grid(fx.set, fx.initial, fx.cfg, {-0.1}, {0.5}), ValidationError);
    EmbeddingSet no_gt = fx.set;
    no_gt.gt_labels.reset();
    CHECK_THROWS_AS(threshold_grid(no_gt, fx.initial, fx.cfg, {0.5}, {0.5}), ValidationError);
}
