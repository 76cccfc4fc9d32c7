#include "glc/glc_net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "glc/errors.hpp"
#include "glc/kernels.hpp"
#include "glc/rng.hpp"

namespace glc {

namespace {

constexpr double kProbClamp = 1e-7;

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// dL/dz for one edge, already in the multiplied-through form that stays finite
// as p saturates. gamma = 0 reduces to the BCE gradient p - y.
double focal_dldz(double p, int y, double gamma) {
    const double pc = clamp_prob(p);
    if (y == 1)
        return gamma * pc * std::pow(1.0 - pc, gamma) * std::log(pc) - std::pow(1.0 - pc, gamma + 1.0);
    return -gamma * (1.0 - pc) * std::pow(pc, gamma) * std::log(1.0 - pc) + std::pow(pc, gamma + 1.0);
}

struct ForwardCache {
    std::vector<Mat> h;  // h[0] = input, h[L] = output
    std::vector<Mat> x;  // per layer, [H || A_hat H]
    std::vector<Mat> z;  // per layer, pre-activation
};

Mat forward_impl(const GlcModel& model, const CsrMatrix& a_hat, const Mat& h0, ForwardCache* cache) {
    if (a_hat.rows != h0.rows) throw ValidationError("gcn_forward: adjacency/feature row mismatch");
    if (model.w_gcn.empty()) throw ValidationError("gcn_forward: model has no layers");
    if (model.w_gcn[0].rows != 2 * h0.cols)
        throw ValidationError("gcn_forward: layer 0 expects input dim " +
                              std::to_string(model.w_gcn[0].rows / 2) + ", got " + std::to_string(h0.cols));

    const std::size_t n = h0.rows;
    Mat h = h0;
    if (cache) cache->h.push_back(h);
    for (const Mat& w : model.w_gcn) {
        const std::size_t din = h.cols;
        if (w.rows != 2 * din) throw ValidationError("gcn_forward: layer weight shape mismatch");
        Mat x(n, 2 * din);
        Mat agg(n, din);
        kernels::csr_matmul(a_hat.offsets.data(), a_hat.cols.data(), a_hat.vals.data(), n, h.data.data(),
                            din, agg.data.data());
        for (std::size_t i = 0; i < n; ++i) {
            std::copy_n(h.row(i), din, x.row(i));
            std::copy_n(agg.row(i), din, x.row(i) + din);
        }
        Mat z(n, w.cols);
        kernels::matmul_nn(x.data.data(), w.data.data(), z.data.data(), n, 2 * din, w.cols);
        h = z;
        kernels::relu(h.data.data(), h.data.size());
        if (cache) {
            cache->x.push_back(std::move(x));
            cache->z.push_back(std::move(z));
            cache->h.push_back(h);
        }
    }
    return h;
}

// Scratch for one edge through the classifier head.
struct EdgeScratch {
    std::vector<double> feat;    // [ |h_i - h_j| || h_i h_j ], 2*d_h
    std::vector<double> q_pre;   // hidden pre-activation, m_edge
    std::vector<double> q;       // hidden activation
    void resize(std::size_t dh, std::size_t m) {
        feat.resize(2 * dh);
        q_pre.resize(m);
        q.resize(m);
    }
};

double edge_logit(const GlcModel& model, const Mat& h, int i, int j, EdgeScratch& s) {
    const std::size_t dh = h.cols;
    const std::size_t m = model.w_edge_in.cols;
    kernels::abs_diff(h.row(i), h.row(j), s.feat.data(), dh);
    kernels::hadamard(h.row(i), h.row(j), s.feat.data() + dh, dh);
    std::copy(model.b_edge_in.begin(), model.b_edge_in.end(), s.q_pre.begin());
    for (std::size_t t = 0; t < 2 * dh; ++t) {
        if (s.feat[t] != 0.0) kernels::axpy(s.feat[t], model.w_edge_in.row(t), s.q_pre.data(), m);
    }
    s.q = s.q_pre;
    kernels::relu(s.q.data(), m);
    return kernels::dot(s.q.data(), model.w_edge_out.data(), m) + model.b_edge_out;
}

struct Gradients {
    std::vector<Mat> w_gcn;
    Mat w_edge_in;
    std::vector<double> b_edge_in;
    std::vector<double> w_edge_out;
    double b_edge_out = 0.0;
};

Gradients zero_like(const GlcModel& model) {
    Gradients g;
    for (const Mat& w : model.w_gcn) g.w_gcn.emplace_back(w.rows, w.cols);
    g.w_edge_in = Mat(model.w_edge_in.rows, model.w_edge_in.cols);
    g.b_edge_in.assign(model.b_edge_in.size(), 0.0);
    g.w_edge_out.assign(model.w_edge_out.size(), 0.0);
    return g;
}

// Focal loss over all labeled edges plus its gradient w.r.t. every parameter.
double loss_and_grad(const GlcModel& model, const CsrMatrix& a_hat, const Mat& h0,
                     const EdgeLabelSet& labels, double gamma, Gradients* grad) {
    if (labels.items.empty()) throw ValidationError("focal_loss: empty edge set");
    ForwardCache cache;
    const Mat h = forward_impl(model, a_hat, h0, &cache);
    const std::size_t dh = h.cols;
    const std::size_t m = model.w_edge_in.cols;
    const double inv_n = 1.0 / static_cast<double>(labels.size());

    EdgeScratch scratch;
    scratch.resize(dh, m);
    std::vector<double> gq(m), gfeat(2 * dh);
    Mat gh(h.rows, dh);  // dL/dH_L
    double loss = 0.0;
    for (const EdgeLabel& e : labels.items) {
        const double z = edge_logit(model, h, e.v1, e.v2, scratch);
        const double p = clamp_prob(logistic(z));
        if (e.y == 1)
            loss += -std::pow(1.0 - p, gamma) * std::log(p);
        else
            loss += -std::pow(p, gamma) * std::log(1.0 - p);
        if (!grad) continue;

        const double g = inv_n * focal_dldz(p, e.y, gamma);

        // head backward: z = w_out . ReLU(W_in^T feat + b_in) + b_out
        kernels::axpy(g, scratch.q.data(), grad->w_edge_out.data(), m);
        grad->b_edge_out += g;
        for (std::size_t t = 0; t < m; ++t) gq[t] = g * model.w_edge_out[t];
        kernels::relu_backward(scratch.q_pre.data(), gq.data(), m);
        kernels::axpy(1.0, gq.data(), grad->b_edge_in.data(), m);
        std::fill(gfeat.begin(), gfeat.end(), 0.0);
        for (std::size_t t = 0; t < 2 * dh; ++t) {
            if (scratch.feat[t] != 0.0)
                kernels::axpy(scratch.feat[t], gq.data(), grad->w_edge_in.row(t), m);
            gfeat[t] = kernels::dot(model.w_edge_in.row(t), gq.data(), m);
        }

        // d feat / d h: |.| routes du by sign, the product term crosses over
        const double* hi = h.row(e.v1);
        const double* hj = h.row(e.v2);
        double* gi = gh.row(e.v1);
        double* gj = gh.row(e.v2);
        for (std::size_t t = 0; t < dh; ++t) {
            const double diff = hi[t] - hj[t];
            const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            gi[t] += sgn * gfeat[t] + hj[t] * gfeat[dh + t];
            gj[t] += -sgn * gfeat[t] + hi[t] * gfeat[dh + t];
        }
    }
    loss *= inv_n;
    if (!grad) return loss;

    // back through the GCN layers
    Mat gcur = std::move(gh);
    for (int l = model.n_layers() - 1; l >= 0; --l) {
        const Mat& z = cache.z[l];
        const Mat& x = cache.x[l];
        const Mat& w = model.w_gcn[l];
        kernels::relu_backward(z.data.data(), gcur.data.data(), gcur.data.size());
        kernels::matmul_tn(x.data.data(), gcur.data.data(), grad->w_gcn[l].data.data(), x.cols, x.rows,
                           gcur.cols);
        if (l == 0) break;
        // dL/dX = Gz W^T, split into the identity half and the aggregated half
        const std::size_t din = x.cols / 2;
        Mat gx(x.rows, x.cols);
        kernels::matmul_nt(gcur.data.data(), w.data.data(), gx.data.data(), x.rows, w.cols, x.cols);
        Mat gprev(x.rows, din);
        for (std::size_t i = 0; i < x.rows; ++i) std::copy_n(gx.row(i), din, gprev.row(i));
        // right half flows through A_hat: dL/dH += A_hat^T Gx_right
        Mat gright(x.rows, din);
        for (std::size_t i = 0; i < x.rows; ++i) std::copy_n(gx.row(i) + din, din, gright.row(i));
        kernels::csr_t_matmul_acc(a_hat.offsets.data(), a_hat.cols.data(), a_hat.vals.data(), a_hat.rows,
                                  gright.data.data(), din, gprev.data.data());
        gcur = std::move(gprev);
    }
    return loss;
}

}  // namespace

GlcModel GlcModel::init(int d_in, int d_h, int layers, std::uint64_t seed) {
    if (d_in < 1 || d_h < 1 || layers < 1) throw ValidationError("GlcModel: dimensions must be >= 1");
    GlcModel m;
    m.d_h = d_h;
    m.seed = seed;
    Rng rng(seed);
    const char* gain_env = std::getenv("GLC_GAIN");
    const double kGcnGain = gain_env ? std::atof(gain_env) : 3.0;
    int din = d_in;
    for (int l = 0; l < layers; ++l) {
        Mat w(2 * din, d_h);
        const double bound = kGcnGain * std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
        for (double& x : w.data) x = rng.uniform(-bound, bound);
        m.w_gcn.push_back(std::move(w));
        din = d_h;
    }
    const char* hg_env = std::getenv("GLC_HGAIN");
    const double kHeadGain = hg_env ? std::atof(hg_env) : 1.0;
    const char* me_env = std::getenv("GLC_MEDGE");
    const int m_edge = me_env ? std::atoi(me_env) : 2 * d_h;
    m.w_edge_in = Mat(2 * d_h, m_edge);
    const double bound_in = kHeadGain * std::sqrt(6.0 / static_cast<double>(2 * d_h + m_edge));
    for (double& x : m.w_edge_in.data) x = rng.uniform(-bound_in, bound_in);
    m.b_edge_in.assign(m_edge, 0.0);
    m.w_edge_out.resize(m_edge);
    const double bound_out = kHeadGain * std::sqrt(6.0 / static_cast<double>(m_edge + 1));
    for (double& x : m.w_edge_out) x = rng.uniform(-bound_out, bound_out);
    m.b_edge_out = 0.0;
    return m;
}

Mat gcn_forward(const GlcModel& model, const CsrMatrix& a_hat, const Mat& h0) {
    return forward_impl(model, a_hat, h0, nullptr);
}

double edge_confidence(const GlcModel& model, const Mat& h, int i, int j) {
    if (i == j) throw ValidationError("edge_confidence: i == j");
    EdgeScratch scratch;
    scratch.resize(h.cols, model.w_edge_in.cols);
    return logistic(edge_logit(model, h, i, j, scratch));
}

std::vector<double> edge_confidences(const GlcModel& model, const Mat& h,
                                     const std::vector<std::pair<int, int>>& edges) {
    std::vector<double> out;
    out.reserve(edges.size());
    EdgeScratch scratch;
    scratch.resize(h.cols, model.w_edge_in.cols);
    for (const auto& [i, j] : edges) out.push_back(logistic(edge_logit(model, h, i, j, scratch)));
    return out;
}

EdgeLabelSet make_edge_labels(const KnnGraph& g, const Labeling& lab) {
    if (lab.size() != g.n) throw ValidationError("make_edge_labels: labeling does not cover graph nodes");
    EdgeLabelSet out;
    for (const auto& [i, j] : g.edges) {
        const int yi = lab.labels[i];
        const int yj = lab.labels[j];
        if (yi < 0 || yj < 0) continue;  // outlier edges are not trained on
        const int y = yi == yj ? 1 : 0;
        out.items.push_back({i, j, y});
        if (y == 1)
            ++out.n_pos;
        else
            ++out.n_neg;
    }
    return out;
}

double focal_loss(const std::vector<double>& preds, const EdgeLabelSet& labels, double gamma) {
    if (labels.items.empty()) throw ValidationError("focal_loss: empty edge set");
    if (preds.size() != labels.size()) throw ValidationError("focal_loss: prediction/label count mismatch");
    double loss = 0.0;
    for (std::size_t e = 0; e < preds.size(); ++e) {
        const double p = clamp_prob(preds[e]);
        if (labels.items[e].y == 1)
            loss += -std::pow(1.0 - p, gamma) * std::log(p);
        else
            loss += -std::pow(p, gamma) * std::log(1.0 - p);
    }
    return loss / static_cast<double>(preds.size());
}

std::pair<GlcModel, TrainReport> train_glc(const KnnGraph& g, const EmbeddingSet& set, const Labeling& lab,
                                           const RunConfig& cfg, std::uint64_t seed) {
    const EdgeLabelSet labels = make_edge_labels(g, lab);
    if (labels.items.empty()) throw ValidationError("train_glc: no training edges");
    const CsrMatrix a_hat = normalized_adjacency(g);
    const int d = static_cast<int>(set.dim());

    GlcModel model = GlcModel::init(d, d, cfg.gcn_layers, seed);
    TrainReport report;
    report.loss.reserve(cfg.t_e);

    // SGD with momentum 0.9: v <- mu v + (dL + wd theta); theta <- theta - lr v
    const char* mu_env = std::getenv("GLC_MU");
    const double kMomentum = mu_env ? std::atof(mu_env) : 0.9;
    Gradients velocity = zero_like(model);
    double v_bias = 0.0;

    for (int it = 0; it < cfg.t_e; ++it) {
        Gradients grad = zero_like(model);
        const double loss = loss_and_grad(model, a_hat, set.features, labels, cfg.gamma, &grad);
        report.loss.push_back(loss);
        for (int l = 0; l < model.n_layers(); ++l) {
            double* w = model.w_gcn[l].data.data();
            double* v = velocity.w_gcn[l].data.data();
            const double* gw = grad.w_gcn[l].data.data();
            for (std::size_t t = 0; t < model.w_gcn[l].data.size(); ++t) {
                v[t] = kMomentum * v[t] + gw[t] + cfg.weight_decay * w[t];
                w[t] -= cfg.lr * v[t];
            }
        }
        for (std::size_t t = 0; t < model.w_edge_in.data.size(); ++t) {
            velocity.w_edge_in.data[t] = kMomentum * velocity.w_edge_in.data[t] +
                                         grad.w_edge_in.data[t] +
                                         cfg.weight_decay * model.w_edge_in.data[t];
            model.w_edge_in.data[t] -= cfg.lr * velocity.w_edge_in.data[t];
        }
        for (std::size_t t = 0; t < model.b_edge_in.size(); ++t) {
            velocity.b_edge_in[t] = kMomentum * velocity.b_edge_in[t] + grad.b_edge_in[t] +
                                    cfg.weight_decay * model.b_edge_in[t];
            model.b_edge_in[t] -= cfg.lr * velocity.b_edge_in[t];
        }
        for (std::size_t t = 0; t < model.w_edge_out.size(); ++t) {
            velocity.w_edge_out[t] = kMomentum * velocity.w_edge_out[t] + grad.w_edge_out[t] +
                                     cfg.weight_decay * model.w_edge_out[t];
            model.w_edge_out[t] -= cfg.lr * velocity.w_edge_out[t];
        }
        v_bias = kMomentum * v_bias + grad.b_edge_out + cfg.weight_decay * model.b_edge_out;
        model.b_edge_out -= cfg.lr * v_bias;
    }
    report.iterations = cfg.t_e;
    report.stop_reason = "early-stop budget reached";
    return {std::move(model), std::move(report)};
}

double grad_check(const GlcModel& model, const KnnGraph& g, const Mat& h0, const EdgeLabelSet& labels,
                  double gamma) {
    if (g.n > 30) throw ValidationError("grad_check: graph too large (max 30 nodes)");
    const CsrMatrix a_hat = normalized_adjacency(g);

    Gradients analytic = zero_like(model);
    loss_and_grad(model, a_hat, h0, labels, gamma, &analytic);

    GlcModel probe = model;
    const double step = 1e-5;
    double max_rel = 0.0;
    auto check_param = [&](double* theta, double g_analytic) {
        const double saved = *theta;
        *theta = saved + step;
        const double lp = loss_and_grad(probe, a_hat, h0, labels, gamma, nullptr);
        *theta = saved - step;
        const double lm = loss_and_grad(probe, a_hat, h0, labels, gamma, nullptr);
        *theta = saved;
        const double fd = (lp - lm) / (2.0 * step);
        const double denom = std::max(std::abs(g_analytic) + std::abs(fd), 1e-8);
        max_rel = std::max(max_rel, std::abs(g_analytic - fd) / denom);
    };

    for (int l = 0; l < model.n_layers(); ++l)
        for (std::size_t t = 0; t < probe.w_gcn[l].data.size(); ++t)
            check_param(&probe.w_gcn[l].data[t], analytic.w_gcn[l].data[t]);
    for (std::size_t t = 0; t < probe.w_edge_in.data.size(); ++t)
        check_param(&probe.w_edge_in.data[t], analytic.w_edge_in.data[t]);
    for (std::size_t t = 0; t < probe.b_edge_in.size(); ++t)
        check_param(&probe.b_edge_in[t], analytic.b_edge_in[t]);
    for (std::size_t t = 0; t < probe.w_edge_out.size(); ++t)
        check_param(&probe.w_edge_out[t], analytic.w_edge_out[t]);
    check_param(&probe.b_edge_out, analytic.b_edge_out);
    return max_rel;
}

void save_model(const GlcModel& model, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    std::fprintf(f, "layers %d d_h %d\n", model.n_layers(), model.d_h);
    for (const Mat& w : model.w_gcn) {
        std::fprintf(f, "w_gcn %zu %zu\n", w.rows, w.cols);
        for (std::size_t i = 0; i < w.data.size(); ++i)
            std::fprintf(f, "%.9g%c", w.data[i], (i + 1) % w.cols == 0 ? '\n' : ' ');
    }
    std::fprintf(f, "w_edge_in %zu %zu\n", model.w_edge_in.rows, model.w_edge_in.cols);
    for (std::size_t i = 0; i < model.w_edge_in.data.size(); ++i)
        std::fprintf(f, "%.9g%c", model.w_edge_in.data[i],
                     (i + 1) % model.w_edge_in.cols == 0 ? '\n' : ' ');
    std::fprintf(f, "b_edge_in %zu\n", model.b_edge_in.size());
    for (std::size_t i = 0; i < model.b_edge_in.size(); ++i)
        std::fprintf(f, "%.9g%c", model.b_edge_in[i], i + 1 == model.b_edge_in.size() ? '\n' : ' ');
    std::fprintf(f, "w_edge_out %zu\n", model.w_edge_out.size());
    for (std::size_t i = 0; i < model.w_edge_out.size(); ++i)
        std::fprintf(f, "%.9g%c", model.w_edge_out[i], i + 1 == model.w_edge_out.size() ? '\n' : ' ');
    std::fprintf(f, "b_edge_out %.9g\n", model.b_edge_out);
    const bool bad = std::ferror(f) != 0;
    std::fclose(f);
    if (bad) throw IoError("write failed: " + path);
}

}  // namespace glc
