#include "glc/knn_graph.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>

#include "glc/errors.hpp"
#include "glc/kernels.hpp"

namespace glc {

KnnGraph KnnGraph::from_edges(std::size_t n, int k, std::vector<std::pair<int, int>> edges,
                              std::vector<double> edge_sim, std::vector<char> node_mask) {
    if (node_mask.size() != n) throw ValidationError("KnnGraph: node_mask length != n");
    if (edge_sim.size() != edges.size()) throw ValidationError("KnnGraph: edge_sim length != edge count");

    // normalize to (i < j) and sort edges with their similarities
    std::vector<std::size_t> order(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto& [i, j] = edges[e];
        if (i == j) throw ValidationError("KnnGraph: self-loop at node " + std::to_string(i));
        if (i > j) std::swap(i, j);
        if (i < 0 || static_cast<std::size_t>(j) >= n) throw ValidationError("KnnGraph: endpoint out of range");
        if (!node_mask[i] || !node_mask[j]) throw ValidationError("KnnGraph: edge touches masked-out node");
        order[e] = e;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });

    KnnGraph g;
    g.n = n;
    g.k = k;
    g.node_mask = std::move(node_mask);
    g.edges.reserve(edges.size());
    g.edge_sim.reserve(edges.size());
    for (std::size_t idx : order) {
        if (!g.edges.empty() && g.edges.back() == edges[idx])
            throw ValidationError("KnnGraph: duplicate edge");
        g.edges.push_back(edges[idx]);
        g.edge_sim.push_back(edge_sim[idx]);
    }

    // CSR adjacency
    g.adj_offsets.assign(n + 1, 0);
    for (const auto& [i, j] : g.edges) {
        ++g.adj_offsets[i + 1];
        ++g.adj_offsets[j + 1];
    }
    for (std::size_t v = 0; v < n; ++v) g.adj_offsets[v + 1] += g.adj_offsets[v];
    g.adj.resize(2 * g.edges.size());
    g.adj_edge.resize(2 * g.edges.size());
    std::vector<int> cursor(g.adj_offsets.begin(), g.adj_offsets.end() - 1);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto [i, j] = g.edges[e];
        g.adj[cursor[i]] = j;
        g.adj_edge[cursor[i]++] = static_cast<int>(e);
        g.adj[cursor[j]] = i;
        g.adj_edge[cursor[j]++] = static_cast<int>(e);
    }
    // neighbor lists come out ascending because edges are sorted (i < j)
    return g;
}

Mat joint_similarity(const EmbeddingSet& set, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("joint_similarity: lambda must be in [0, 1]");
    if (lambda < 1.0 && !set.scores)
        throw ValidationError("joint_similarity: lambda < 1 requires classification scores");

    const std::size_t n = set.n();
    Mat sim(n, n);
    // symmetric: fill the upper triangle (including diagonal) and mirror
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double v = 0.0;
            if (lambda > 0.0)
                v += lambda * kernels::dot(set.features.row(i), set.features.row(j), set.features.cols);
            if (lambda < 1.0)
                v += (1.0 - lambda) * kernels::dot(set.scores->row(i), set.scores->row(j), set.scores->cols);
            sim(i, j) = v;
            sim(j, i) = v;
        }
    }
    return sim;
}

KnnGraph build_knn_graph(const Mat& sim, int k, const std::vector<char>& node_mask) {
    const std::size_t n = sim.rows;
    if (sim.cols != n) throw ValidationError("build_knn_graph: similarity matrix must be square");
    if (node_mask.size() != n) throw ValidationError("build_knn_graph: node_mask length != n");
    if (k < 1) throw ValidationError("build_knn_graph: k must be >= 1");

    std::vector<int> masked;
    for (std::size_t i = 0; i < n; ++i)
        if (node_mask[i]) masked.push_back(static_cast<int>(i));
    if (masked.size() < 2) throw ValidationError("build_knn_graph: fewer than 2 masked-in nodes");

    const int kc = std::min<int>(k, static_cast<int>(masked.size()) - 1);

    // top-kc per masked-in node, then union-symmetrize
    std::vector<std::pair<int, int>> edges;
    std::vector<int> cand;
    cand.reserve(masked.size());
    for (int i : masked) {
        cand.clear();
        for (int j : masked)
            if (j != i) cand.push_back(j);
        auto better = [&](int a, int b) {
            const double sa = sim(i, a), sb = sim(i, b);
            if (sa != sb) return sa > sb;
            return a < b;
        };
        std::nth_element(cand.begin(), cand.begin() + (kc - 1), cand.end(), better);
        for (int t = 0; t < kc; ++t) {
            const int j = cand[t];
            edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<double> sims;
    sims.reserve(edges.size());
    for (const auto& [i, j] : edges) sims.push_back(sim(i, j));
    return KnnGraph::from_edges(n, k, std::move(edges), std::move(sims), node_mask);
}

CsrMatrix normalized_adjacency(const KnnGraph& g) {
    CsrMatrix a;
    a.rows = g.n;
    a.offsets.assign(g.n + 1, 0);
    for (std::size_t i = 0; i < g.n; ++i) a.offsets[i + 1] = a.offsets[i] + g.degree(static_cast<int>(i)) + 1;
    a.cols.resize(a.offsets.back());
    a.vals.resize(a.offsets.back());
    for (std::size_t i = 0; i < g.n; ++i) {
        const int deg = g.degree(static_cast<int>(i));
        const double w = 1.0 / (1.0 + deg);
        int p = a.offsets[i];
        // merge the self-loop into the ascending neighbor list
        bool self_done = false;
        for (int q = g.adj_offsets[i]; q < g.adj_offsets[i + 1]; ++q) {
            const int j = g.adj[q];
            if (!self_done && static_cast<int>(i) < j) {
                a.cols[p] = static_cast<int>(i);
                a.vals[p++] = w;
                self_done = true;
            }
            a.cols[p] = j;
            a.vals[p++] = w;
        }
        if (!self_done) {
            a.cols[p] = static_cast<int>(i);
            a.vals[p++] = w;
        }
    }
    return a;
}

double node_connectivity(const KnnGraph& g, int i, int j) {
    if (i == j) throw ValidationError("node_connectivity: i == j");
    if (!g.masked_in(i) || !g.masked_in(j)) throw ValidationError("node_connectivity: masked-out node");
    const int di = g.degree(i);
    const int dj = g.degree(j);
    if (di == 0 || dj == 0) return 0.0;

    // two-pointer intersection of sorted neighbor lists, skipping i and j
    int share = 0;
    int p = g.adj_offsets[i], pe = g.adj_offsets[i + 1];
    int q = g.adj_offsets[j], qe = g.adj_offsets[j + 1];
    while (p < pe && q < qe) {
        int a = g.adj[p], b = g.adj[q];
        if (a == i || a == j) {
            ++p;
            continue;
        }
        if (b == i || b == j) {
            ++q;
            continue;
        }
        if (a == b) {
            ++share;
            ++p;
            ++q;
        } else if (a < b) {
            ++p;
        } else {
            ++q;
        }
    }
    const double s = static_cast<double>(share);
    return std::max(s / di, s / dj);
}

Labeling connected_components(const KnnGraph& g) {
    std::vector<int> label(g.n, -1);
    int next = 0;
    std::deque<int> queue;
    for (std::size_t s = 0; s < g.n; ++s) {
        if (!g.node_mask[s] || label[s] >= 0) continue;
        label[s] = next;
        queue.assign(1, static_cast<int>(s));
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int p = g.adj_offsets[v]; p < g.adj_offsets[v + 1]; ++p) {
                const int u = g.adj[p];
                if (label[u] < 0) {
                    label[u] = next;
                    queue.push_back(u);
                }
            }
        }
        ++next;
    }
    return Labeling(std::move(label));
}

void save_graph(const KnnGraph& g, const std::string& path, const std::vector<double>* confidence) {
    if (confidence && confidence->size() != g.edges.size())
        throw ValidationError("save_graph: confidence length != edge count");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    std::fprintf(f, "%zu %d\n", g.n, g.k);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        std::fprintf(f, "%d %d %.17g", g.edges[e].first, g.edges[e].second, g.edge_sim[e]);
        if (confidence) std::fprintf(f, " %.17g", (*confidence)[e]);
        std::fprintf(f, "\n");
    }
    const bool bad = std::ferror(f) != 0;
    std::fclose(f);
    if (bad) throw IoError("write failed: " + path);
}

KnnGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
    std::size_t n = 0;
    int k = 0;
    if (std::sscanf(line.c_str(), "%zu %d", &n, &k) != 2)
        throw ParseError(path + ":1: expected header 'n k'");
    std::vector<std::pair<int, int>> edges;
    std::vector<double> sims;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        int i, j;
        double s, conf;
        const int got = std::sscanf(line.c_str(), "%d %d %lf %lf", &i, &j, &s, &conf);
        if (got < 3) throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'i j sim [conf]'");
        edges.emplace_back(i, j);
        sims.push_back(s);
    }
    // loaded graphs treat every node as masked-in
    return KnnGraph::from_edges(n, k, std::move(edges), std::move(sims), std::vector<char>(n, 1));
}

}  // namespace glc
