#include "glc/selftrain.hpp"

#include <algorithm>
#include <cmath>

#include "glc/clustering.hpp"
#include "glc/correction.hpp"
#include "glc/errors.hpp"
#include "glc/kernels.hpp"
#include "glc/metrics.hpp"
#include "glc/rng.hpp"

namespace glc {

namespace {

// stream ids for per-epoch derived seeds
enum : std::uint64_t { kStreamInit = 0, kStreamTrain = 1, kStreamGlc = 2, kStreamRestart = 3 };

void glorot_fill(Mat& w, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
    for (double& x : w.data) x = rng.uniform(-bound, bound);
}

// features = normalize(raw * w_embed); returns the pre-normalization norms
// when norms_out is non-null (the backward pass needs them).
Mat embed_features(const Mat& w_embed, const Mat& inputs, std::vector<double>* norms_out) {
    Mat f(inputs.rows, w_embed.cols);
    kernels::matmul_nn(inputs.data.data(), w_embed.data.data(), f.data.data(), inputs.rows, inputs.cols,
                       w_embed.cols);
    if (norms_out) norms_out->resize(inputs.rows);
    for (std::size_t i = 0; i < f.rows; ++i) {
        double norm = std::sqrt(kernels::dot(f.row(i), f.row(i), f.cols));
        if (norm < 1e-12) norm = 1e-12;
        kernels::scal(1.0 / norm, f.row(i), f.cols);
        if (norms_out) (*norms_out)[i] = norm;
    }
    return f;
}

void softmax_row(double* logits, std::size_t c) {
    double mx = logits[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, logits[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
        logits[j] = std::exp(logits[j] - mx);
        sum += logits[j];
    }
    for (std::size_t j = 0; j < c; ++j) logits[j] /= sum;
}

}  // namespace

ToyExtractor ToyExtractor::init(int d_raw, int d, std::uint64_t seed) {
    if (d_raw < 1 || d < 1) throw ValidationError("ToyExtractor: dimensions must be >= 1");
    if (d > d_raw) throw ValidationError("ToyExtractor: d must be <= d_raw");
    ToyExtractor ext;
    ext.w_embed = Mat(d_raw, d);
    Rng rng(seed);
    // orthonormal columns (Gram-Schmidt on Gaussian draws): the initial
    // embedding is an isometry, so epoch-0 features keep the raw geometry
    for (int j = 0; j < d; ++j) {
        std::vector<double> v(d_raw);
        for (double& x : v) x = rng.normal();
        for (int prev = 0; prev < j; ++prev) {
            double proj = 0.0;
            for (int t = 0; t < d_raw; ++t) proj += v[t] * ext.w_embed(t, prev);
            for (int t = 0; t < d_raw; ++t) v[t] -= proj * ext.w_embed(t, prev);
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-9) {
            v.assign(d_raw, 0.0);
            v[j % d_raw] = 1.0;
            norm = 1.0;
        }
        for (int t = 0; t < d_raw; ++t) ext.w_embed(t, j) = v[t] / norm;
    }
    return ext;
}

void ToyExtractor::reset_classifier(int c, std::uint64_t seed) {
    if (c < 1) throw ValidationError("ToyExtractor: class count must be >= 1");
    w_cls = Mat(w_embed.cols, c);
    b_cls.assign(c, 0.0);
    Rng rng(seed);
    glorot_fill(w_cls, rng);
}

EmbeddingSet extract(const ToyExtractor& ext, const RawDataset& raw) {
    if (raw.inputs.cols != ext.w_embed.rows)
        throw ValidationError("extract: input dim " + std::to_string(raw.inputs.cols) +
                              " != embedding rows " + std::to_string(ext.w_embed.rows));
    EmbeddingSet set;
    set.features = embed_features(ext.w_embed, raw.inputs, nullptr);
    if (ext.n_classes() > 0) {
        const std::size_t c = ext.w_cls.cols;
        Mat s(set.features.rows, c);
        kernels::matmul_nn(set.features.data.data(), ext.w_cls.data.data(), s.data.data(),
                           set.features.rows, set.features.cols, c);
        for (std::size_t i = 0; i < s.rows; ++i) {
            kernels::axpy(1.0, ext.b_cls.data(), s.row(i), c);
            softmax_row(s.row(i), c);
        }
        set.scores = std::move(s);
    }
    set.cameras = raw.cameras;
    set.gt_labels = raw.gt_labels;
    return set;
}

ToyExtractor train_extractor(ToyExtractor ext, const RawDataset& raw, const Labeling& lab, int steps,
                             double lr, std::uint64_t seed) {
    if (lab.size() != raw.n()) throw ValidationError("train_extractor: labeling length != n");
    if (lab.n_clusters < 1) throw ValidationError("train_extractor: no clusters to train on");
    std::vector<int> samples;
    for (std::size_t i = 0; i < lab.size(); ++i)
        if (lab.labels[i] >= 0) samples.push_back(static_cast<int>(i));
    if (samples.empty()) throw ValidationError("train_extractor: all samples are outliers");

    if (ext.n_classes() != lab.n_clusters) ext.reset_classifier(lab.n_clusters, seed);

    const std::size_t d_raw = raw.inputs.cols;
    const std::size_t d = ext.w_embed.cols;
    const std::size_t c = ext.w_cls.cols;
    const double inv_m = 1.0 / static_cast<double>(samples.size());

    std::vector<double> norms;
    Mat glogits(raw.n(), c);
    std::vector<double> gf(d), gu(d);
    Mat gw_cls(d, c);
    std::vector<double> gb_cls(c);
    Mat gw_embed(d_raw, d);

    for (int step = 0; step < steps; ++step) {
        const Mat f = embed_features(ext.w_embed, raw.inputs, &norms);
        gw_cls.set_zero();
        gw_embed.set_zero();
        std::fill(gb_cls.begin(), gb_cls.end(), 0.0);

        for (int i : samples) {
            double* gl = glogits.row(i);
            kernels::matmul_nn(f.row(i), ext.w_cls.data.data(), gl, 1, d, c);
            kernels::axpy(1.0, ext.b_cls.data(), gl, c);
            softmax_row(gl, c);
            gl[lab.labels[i]] -= 1.0;  // softmax - onehot
            kernels::scal(inv_m, gl, c);

            // dL/dW_cls += f_i^T glogits_i ; dL/df_i = W_cls glogits_i
            for (std::size_t t = 0; t < d; ++t) {
                kernels::axpy(f.row(i)[t], gl, gw_cls.row(t), c);
                gf[t] = kernels::dot(ext.w_cls.row(t), gl, c);
            }
            kernels::axpy(1.0, gl, gb_cls.data(), c);

            // through the row normalization: du = (df - (df . f) f) / ||u||
            const double proj = kernels::dot(gf.data(), f.row(i), d);
            for (std::size_t t = 0; t < d; ++t) gu[t] = (gf[t] - proj * f.row(i)[t]) / norms[i];

            // dL/dW_embed += x_i^T du
            const double* x = raw.inputs.row(i);
            for (std::size_t t = 0; t < d_raw; ++t)
                if (x[t] != 0.0) kernels::axpy(x[t], gu.data(), gw_embed.row(t), d);
        }

        kernels::axpy(-lr, gw_cls.data.data(), ext.w_cls.data.data(), gw_cls.data.size());
        kernels::axpy(-lr, gb_cls.data(), ext.b_cls.data(), c);
        kernels::axpy(-lr, gw_embed.data.data(), ext.w_embed.data.data(), gw_embed.data.size());
    }
    return ext;
}

EmbeddingSet warmup_embeddings(const RawDataset& raw, const RunConfig& cfg, int epochs,
                               std::uint64_t seed) {
    ToyExtractor ext = ToyExtractor::init(static_cast<int>(raw.inputs.cols), cfg.d,
                                          mix_seed(seed, 0, kStreamInit));
    for (int t = 0; t < epochs; ++t) {
        const EmbeddingSet set = extract(ext, raw);
        const Labeling lab = dbscan(set, cfg.dbscan_params());
        ext = train_extractor(std::move(ext), raw, lab, cfg.inner_steps, cfg.extractor_lr,
                              mix_seed(seed, t, kStreamTrain));
    }
    return extract(ext, raw);
}

LoopResult run_loop(const RawDataset& raw, const RunConfig& cfg, bool use_glc, std::uint64_t seed) {
    cfg.validate();
    const int T = cfg.epochs;
    const int t_start = static_cast<int>(std::floor(cfg.p_s * T + 1e-9));
    const int t_restart = static_cast<int>(std::floor(cfg.p_r * T + 1e-9));

    LoopResult out;
    ToyExtractor ext = ToyExtractor::init(static_cast<int>(raw.inputs.cols), cfg.d,
                                          mix_seed(seed, 0, kStreamInit));
    bool restart_done = false;

    for (int t = 0; t < T; ++t) {
        const EmbeddingSet set = extract(ext, raw);
        Labeling lab = dbscan(set, cfg.dbscan_params());

        EpochRecord rec;
        rec.epoch = t;
        if (use_glc && t >= t_start && (t - t_start) % cfg.t_c == 0) {
            CorrectionResult cr = correct(set, lab, cfg, mix_seed(seed, t, kStreamGlc));
            lab = std::move(cr.corrected);
            rec.glc_applied = true;
            rec.edges_removed_conf = cr.edges_removed_conf;
            rec.edges_removed_nc = cr.edges_removed_nc;
        }

        // one-time restart: labels computed this epoch are kept, only the
        // extractor parameters start over
        if (!restart_done && t == t_restart && t < T) {
            ext = ToyExtractor::init(static_cast<int>(raw.inputs.cols), cfg.d,
                                     mix_seed(seed, t, kStreamRestart));
            rec.restarted = true;
            restart_done = true;
        }

        rec.nmi = nmi(lab, raw.gt_labels);
        rec.pair_f = pairwise_prf(lab, raw.gt_labels).f;
        rec.n_outliers = lab.n_outliers();
        rec.map = retrieval_map_loo(set.features, raw.gt_labels);
        out.history.push_back(rec);

        ext = train_extractor(std::move(ext), raw, lab, cfg.inner_steps, cfg.extractor_lr,
                              mix_seed(seed, t, kStreamTrain));
        out.final_labels = std::move(lab);
    }
    out.extractor = std::move(ext);
    return out;
}

}  // namespace glc
