#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glc/mat.hpp"

namespace glc {

// N samples with unit-length d-dim feature rows, optional per-sample class
// probability rows, camera ids and optional ground-truth identity ids.
struct EmbeddingSet {
    Mat features;                               // n x d, every row L2-normalized
    std::optional<Mat> scores;                  // n x c, rows sum to 1, entries >= 0
    std::vector<int> cameras;                   // n
    std::optional<std::vector<int>> gt_labels;  // n

    std::size_t n() const { return features.rows; }
    std::size_t dim() const { return features.cols; }
    std::size_t n_classes() const { return scores ? scores->cols : 0; }

    // Validates all invariants; throws ValidationError on violation.
    void validate() const;

    static EmbeddingSet make(Mat features, std::optional<Mat> scores, std::vector<int> cameras,
                             std::optional<std::vector<int>> gt_labels);
};

// Per-sample pseudo labels. -1 marks an outlier; non-negative values are
// cluster ids, compacted to a dense [0, n_clusters) range on construction.
struct Labeling {
    std::vector<int> labels;
    int n_clusters = 0;

    Labeling() = default;
    explicit Labeling(std::vector<int> raw);

    std::size_t size() const { return labels.size(); }
    int n_outliers() const;
    bool operator==(const Labeling&) const = default;
};

struct SynthSpec {
    int n_identities = 30;
    int samples_per_identity = 20;
    int d_raw = 16;
    int n_cameras = 4;
    double camera_shift = 2.0;
    double cluster_spread = 0.4;
    std::uint64_t seed = 1;

    void validate() const;
};

// Raw (not yet embedded) synthetic inputs.
struct RawDataset {
    Mat inputs;  // n x d_raw
    std::vector<int> cameras;
    std::vector<int> gt_labels;

    std::size_t n() const { return inputs.rows; }
};

// Balanced identities; each sample = identity centroid + N(0, spread^2) noise
// + a per-camera offset of norm camera_shift. Pure function of the spec.
RawDataset generate_synthetic(const SynthSpec& spec);

// CSV IO. Embeddings: header id,camera,gt_label,f_0..f_{d-1}[,s_0..s_{c-1}];
// labels: header id,label; raw: header id,camera,gt_label,x_0..x_{d_raw-1}.
// Doubles are written with 17 significant digits so round-trips are exact.
EmbeddingSet load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingSet& set, const std::string& path);
Labeling load_labels(const std::string& path);
void save_labels(const Labeling& lab, const std::string& path);
RawDataset load_raw(const std::string& path);
void save_raw(const RawDataset& raw, const std::string& path);

}  // namespace glc
