#pragma once

#include <string>
#include <utility>
#include <vector>

#include "glc/dataset.hpp"
#include "glc/mat.hpp"

namespace glc {

// Symmetric sparse graph over n nodes. Edges are unordered (i < j) pairs,
// deduplicated and lexicographically sorted; a CSR adjacency over the same
// edges is kept alongside for neighborhood queries.
struct KnnGraph {
    std::size_t n = 0;
    int k = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<double> edge_sim;
    std::vector<char> node_mask;  // 1 = node participates in the graph

    // CSR adjacency; adj_edge[p] is the index into edges/edge_sim.
    std::vector<int> adj_offsets;
    std::vector<int> adj;
    std::vector<int> adj_edge;

    int degree(int v) const { return adj_offsets[v + 1] - adj_offsets[v]; }
    bool masked_in(int v) const { return node_mask[v] != 0; }
    std::size_t n_edges() const { return edges.size(); }

    // Validates (no self-loops, no duplicates, endpoints masked-in), sorts
    // edges, and builds the adjacency.
    static KnnGraph from_edges(std::size_t n, int k, std::vector<std::pair<int, int>> edges,
                               std::vector<double> edge_sim, std::vector<char> node_mask);
};

// S_joint = lambda * F F^T + (1 - lambda) * S S^T over rows. Scores must be
// present when lambda < 1.
Mat joint_similarity(const EmbeddingSet& set, double lambda);

// Links every masked-in node to its k most similar masked-in nodes (self
// excluded, similarity ties broken by lower index) and symmetrizes by union:
// an edge exists if either endpoint lists the other. k is clamped to
// (masked-in count - 1).
KnnGraph build_knn_graph(const Mat& sim, int k, const std::vector<char>& node_mask);

struct CsrMatrix {
    std::size_t rows = 0;
    std::vector<int> offsets;
    std::vector<int> cols;
    std::vector<double> vals;
};

// Row-normalized adjacency with self-loops: A_hat = D_hat^-1 (A + I) where
// D_hat_ii = 1 + degree(i). Every row sums to 1; an isolated node gets the
// unit self-row.
CsrMatrix normalized_adjacency(const KnnGraph& g);

// NC_{i,j} = max(N_share/N_i, N_share/N_j) where N_share counts shared
// neighbors (excluding i and j themselves) and N_i, N_j are degrees. Zero
// when either degree is zero.
double node_connectivity(const KnnGraph& g, int i, int j);

// One compact label per connected component of masked-in nodes, ordered by
// the component's smallest node index; masked-out nodes get -1.
Labeling connected_components(const KnnGraph& g);

// Debug dump: header "n k" then one line "i j sim [confidence]" per edge.
void save_graph(const KnnGraph& g, const std::string& path,
                const std::vector<double>* confidence = nullptr);
KnnGraph load_graph(const std::string& path);

}  // namespace glc
