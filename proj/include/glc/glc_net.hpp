#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "glc/config.hpp"
#include "glc/dataset.hpp"
#include "glc/knn_graph.hpp"
#include "glc/mat.hpp"

namespace glc {

// Correction network: res-GCN layers that concatenate each node's features
// with its aggregated neighborhood, followed by a symmetric edge classifier
// on the featurization [|h_i - h_j| || h_i h_j] (one hidden ReLU layer, then
// a logistic unit). The featurization is symmetric in (i, j), so confidences
// are too.
struct GlcModel {
    std::vector<Mat> w_gcn;      // layer l maps (2 * d_in_l) -> d_h
    Mat w_edge_in;               // 2*d_h x m_edge
    std::vector<double> b_edge_in;   // m_edge
    std::vector<double> w_edge_out;  // m_edge
    double b_edge_out = 0.0;
    int d_h = 0;
    std::uint64_t seed = 0;

    int n_layers() const { return static_cast<int>(w_gcn.size()); }
    int edge_hidden() const { return static_cast<int>(w_edge_in.cols); }

    // Fresh parameters: uniform +-sqrt(6 / (fan_in + fan_out)) weights scaled
    // by a fixed gain, zero biases.
    static GlcModel init(int d_in, int d_h, int layers, std::uint64_t seed);
};

struct EdgeLabel {
    int v1, v2;
    int y;  // 1 = same pseudo label
};

struct EdgeLabelSet {
    std::vector<EdgeLabel> items;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;

    std::size_t size() const { return items.size(); }
};

struct TrainReport {
    std::vector<double> loss;  // value at the start of each iteration
    int iterations = 0;
    std::string stop_reason;
};

// H_{l+1} = ReLU([H_l || A_hat H_l] W_l), H_0 = features.
Mat gcn_forward(const GlcModel& model, const CsrMatrix& a_hat, const Mat& h0);

double edge_confidence(const GlcModel& model, const Mat& h, int i, int j);
std::vector<double> edge_confidences(const GlcModel& model, const Mat& h,
                                     const std::vector<std::pair<int, int>>& edges);

// One binary label per graph edge whose endpoints are both non-outliers; an
// edge touching an outlier is dropped from the training set.
EdgeLabelSet make_edge_labels(const KnnGraph& g, const Labeling& lab);

// L = 1/N ( sum_{y=1} -(1-p)^g log p  +  sum_{y=0} -p^g log(1-p) ), N = m + n.
// Predictions are clamped to [1e-7, 1 - 1e-7]. gamma = 0 recovers mean BCE.
double focal_loss(const std::vector<double>& preds, const EdgeLabelSet& labels, double gamma);

// Full-batch gradient descent for exactly cfg.t_e iterations (the early-stop
// budget) at cfg.lr with L2 weight decay cfg.weight_decay; parameters freshly
// initialized from `seed`. The graph must already exclude outlier nodes.
std::pair<GlcModel, TrainReport> train_glc(const KnnGraph& g, const EmbeddingSet& set, const Labeling& lab,
                                           const RunConfig& cfg, std::uint64_t seed);

// Max relative error between the analytic focal-loss gradient and central
// finite differences (step 1e-5) over every parameter. Graphs over 30 nodes
// are rejected.
double grad_check(const GlcModel& model, const KnnGraph& g, const Mat& h0, const EdgeLabelSet& labels,
                  double gamma);

// Flat text dump: per-tensor shape line followed by row-major values.
void save_model(const GlcModel& model, const std::string& path);

}  // namespace glc
