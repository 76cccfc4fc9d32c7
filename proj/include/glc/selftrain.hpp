#pragma once

#include <cstdint>
#include <vector>

#include "glc/config.hpp"
#include "glc/dataset.hpp"

namespace glc {

// Linear stand-in for the feature extraction network: an embedding matrix
// whose L2-normalized outputs are the features, plus a linear classifier
// producing softmax scores over the current cluster count. The classifier is
// rebuilt from scratch whenever the cluster count changes.
struct ToyExtractor {
    Mat w_embed;                // d_raw x d
    Mat w_cls;                  // d x c, c == 0 until first training
    std::vector<double> b_cls;  // c

    int n_classes() const { return static_cast<int>(w_cls.cols); }

    static ToyExtractor init(int d_raw, int d, std::uint64_t seed);
    void reset_classifier(int c, std::uint64_t seed);
};

// features = normalize(raw * w_embed); scores = softmax(features * w_cls + b)
// when a classifier exists, absent otherwise.
EmbeddingSet extract(const ToyExtractor& ext, const RawDataset& raw);

// Softmax cross-entropy on non-outlier samples, `steps` full-batch gradient
// steps on both the embedding and the classifier. Rebuilds the classifier
// (fresh init from `seed`) when lab.n_clusters differs from the current one.
[[nodiscard]] ToyExtractor train_extractor(ToyExtractor ext, const RawDataset& raw, const Labeling& lab,
                                           int steps, double lr, std::uint64_t seed);

struct EpochRecord {
    int epoch = 0;
    double nmi = 0.0;
    double pair_f = 0.0;
    int n_outliers = 0;
    double map = 0.0;
    std::size_t edges_removed_conf = 0;
    std::size_t edges_removed_nc = 0;
    bool restarted = false;
    bool glc_applied = false;
};

struct LoopResult {
    std::vector<EpochRecord> history;
    Labeling final_labels;
    ToyExtractor extractor;
};

// The full self-training loop: extract -> cluster -> (correct on schedule)
// -> train extractor, for cfg.epochs epochs. Correction runs from epoch
// floor(p_s * T) every t_c epochs when use_glc is set, each time with a
// freshly initialized correction network. At epoch floor(p_r * T) the
// extractor is re-initialized from scratch once, keeping the current labels.
LoopResult run_loop(const RawDataset& raw, const RunConfig& cfg, bool use_glc, std::uint64_t seed);

// Short extract -> cluster -> train warmup; returns embeddings whose scores
// come from the classifier trained in the last warmup epoch.
EmbeddingSet warmup_embeddings(const RawDataset& raw, const RunConfig& cfg, int epochs, std::uint64_t seed);

}  // namespace glc
