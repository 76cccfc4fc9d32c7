#include "glc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "glc/errors.hpp"
#include "glc/kernels.hpp"
#include "glc/rng.hpp"

namespace glc {

void DbscanParams::validate() const {
    if (!(eps > 0.0 && eps <= 2.0)) throw ValidationError("DbscanParams: eps must be in (0, 2]");
    if (min_pts < 1) throw ValidationError("DbscanParams: min_pts must be >= 1");
}

namespace {

// All points within cosine distance eps of point i, ascending, including i.
std::vector<int> region_query(const Mat& f, int i, double eps) {
    std::vector<int> out;
    const double* fi = f.row(i);
    for (std::size_t j = 0; j < f.rows; ++j) {
        const double dist = 1.0 - kernels::dot(fi, f.row(j), f.cols);
        if (dist <= eps) out.push_back(static_cast<int>(j));
    }
    return out;
}

}  // namespace

Labeling dbscan(const EmbeddingSet& set, const DbscanParams& params) {
    params.validate();
    const int n = static_cast<int>(set.n());
    if (n < 1) throw ValidationError("dbscan: empty input");

    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    std::vector<int> label(n, kUnvisited);
    int cluster = 0;

    for (int i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        std::vector<int> neigh = region_query(set.features, i, params.eps);
        if (static_cast<int>(neigh.size()) < params.min_pts) {
            label[i] = kNoise;
            continue;
        }
        label[i] = cluster;
        std::deque<int> queue(neigh.begin(), neigh.end());
        while (!queue.empty()) {
            const int q = queue.front();
            queue.pop_front();
            if (label[q] == kNoise) label[q] = cluster;  // border point
            if (label[q] != kUnvisited) continue;
            label[q] = cluster;
            std::vector<int> qn = region_query(set.features, q, params.eps);
            if (static_cast<int>(qn.size()) >= params.min_pts)
                queue.insert(queue.end(), qn.begin(), qn.end());
        }
        ++cluster;
    }
    return Labeling(std::move(label));
}

Labeling kmeans(const EmbeddingSet& set, int k, std::uint64_t seed, std::vector<double>* objective_history) {
    const int n = static_cast<int>(set.n());
    const std::size_t d = set.dim();
    if (k < 1 || k > n) throw ValidationError("kmeans: k must be in [1, n]");
    Rng rng(seed);

    auto sqdist = [&](const double* a, const double* b) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double t = a[j] - b[j];
            s += t * t;
        }
        return s;
    };

    // farthest-point init: seeded first pick, then repeatedly the point
    // farthest from its nearest chosen centroid (ties to the lower index)
    Mat centroids(k, d);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    int first = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    std::copy_n(set.features.row(first), d, centroids.row(0));
    for (int c = 1; c < k; ++c) {
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], sqdist(set.features.row(i), centroids.row(c - 1)));
            if (nearest[i] > far_d) {
                far_d = nearest[i];
                far = i;
            }
        }
        std::copy_n(set.features.row(far), d, centroids.row(c));
    }

    std::vector<int> assign(n, -1);
    std::vector<int> counts(k);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        double objective = 0.0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double dd = sqdist(set.features.row(i), centroids.row(c));
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            objective += best_d;
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (objective_history) objective_history->push_back(objective);
        if (!changed) break;

        centroids.set_zero();
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            kernels::axpy(1.0, set.features.row(i), centroids.row(assign[i]), d);
            ++counts[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                kernels::scal(1.0 / counts[c], centroids.row(c), d);
            } else {
                // re-seed to the point farthest from its own centroid
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double dd = sqdist(set.features.row(i), centroids.row(assign[i]));
                    if (dd > far_d) {
                        far_d = dd;
                        far = i;
                    }
                }
                std::copy_n(set.features.row(far), d, centroids.row(c));
            }
        }
    }
    return Labeling(std::move(assign));
}

Labeling corrupt_labels(const Labeling& lab, double flip_rate, double outlier_rate, std::uint64_t seed) {
    if (!(flip_rate >= 0.0 && flip_rate <= 1.0) || !(outlier_rate >= 0.0 && outlier_rate <= 1.0))
        throw ValidationError("corrupt_labels: rates must be in [0, 1]");
    if (flip_rate > 0.0 && lab.n_clusters < 2)
        throw ValidationError("corrupt_labels: flipping needs at least 2 clusters");

    std::vector<int> labeled;
    for (std::size_t i = 0; i < lab.size(); ++i)
        if (lab.labels[i] >= 0) labeled.push_back(static_cast<int>(i));
    // +1e-9 absorbs representation error so e.g. 0.3 * 10 floors to 3
    const std::size_t m_flip =
        static_cast<std::size_t>(std::floor(flip_rate * static_cast<double>(labeled.size()) + 1e-9));
    const std::size_t m_out =
        static_cast<std::size_t>(std::floor(outlier_rate * static_cast<double>(labeled.size()) + 1e-9));
    if (m_flip + m_out > labeled.size())
        throw ValidationError("corrupt_labels: flip_rate + outlier_rate selects more than all labeled samples");

    // partial Fisher-Yates picks m_flip + m_out distinct victims
    Rng rng(seed);
    for (std::size_t i = 0; i < m_flip + m_out; ++i) {
        const std::size_t j = i + rng.uniform_below(labeled.size() - i);
        std::swap(labeled[i], labeled[j]);
    }

    std::vector<int> out = lab.labels;
    for (std::size_t i = 0; i < m_flip; ++i) {
        const int cur = out[labeled[i]];
        int next = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(lab.n_clusters - 1)));
        if (next >= cur) ++next;
        out[labeled[i]] = next;
    }
    for (std::size_t i = m_flip; i < m_flip + m_out; ++i) out[labeled[i]] = -1;
    return Labeling(std::move(out));
}

}  // namespace glc
