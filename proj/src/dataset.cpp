#include "glc/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "glc/errors.hpp"
#include "glc/kernels.hpp"
#include "glc/rng.hpp"

namespace glc {

// ---- EmbeddingSet ------------------------------------------------------------

void EmbeddingSet::validate() const {
    const std::size_t nn = features.rows;
    if (cameras.size() != nn) throw ValidationError("EmbeddingSet: cameras length != n");
    if (gt_labels && gt_labels->size() != nn) throw ValidationError("EmbeddingSet: gt_labels length != n");
    if (scores && scores->rows != nn) throw ValidationError("EmbeddingSet: scores rows != n");
    for (std::size_t i = 0; i < nn; ++i) {
        const double norm = std::sqrt(kernels::dot(features.row(i), features.row(i), features.cols));
        if (std::abs(norm - 1.0) > 1e-6)
            throw ValidationError("EmbeddingSet: feature row " + std::to_string(i) + " has norm " +
                                  std::to_string(norm));
    }
    if (scores) {
        for (std::size_t i = 0; i < nn; ++i) {
            const double* row = scores->row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < scores->cols; ++j) {
                if (row[j] < 0.0)
                    throw ValidationError("EmbeddingSet: negative score entry in row " + std::to_string(i));
                s += row[j];
            }
            if (std::abs(s - 1.0) > 1e-6)
                throw ValidationError("EmbeddingSet: score row " + std::to_string(i) + " sums to " +
                                      std::to_string(s));
        }
    }
}

EmbeddingSet EmbeddingSet::make(Mat features, std::optional<Mat> scores, std::vector<int> cameras,
                                std::optional<std::vector<int>> gt_labels) {
    EmbeddingSet set{std::move(features), std::move(scores), std::move(cameras), std::move(gt_labels)};
    set.validate();
    return set;
}

// ---- Labeling ----------------------------------------------------------------

Labeling::Labeling(std::vector<int> raw) : labels(std::move(raw)) {
    // Compact non-negative ids to [0, n_clusters) by id rank, so an already
    // dense labeling passes through unchanged. The partition is untouched;
    // only the id values change.
    std::map<int, int> remap;
    for (int v : labels)
        if (v >= 0) remap.emplace(v, 0);
    int next = 0;
    for (auto& [id, compact] : remap) compact = next++;
    for (int& v : labels) v = v < 0 ? -1 : remap[v];
    n_clusters = next;
}

int Labeling::n_outliers() const {
    int c = 0;
    for (int v : labels)
        if (v < 0) ++c;
    return c;
}

// ---- synthetic data ------------------------------------------------------------

void SynthSpec::validate() const {
    if (n_identities < 1) throw ValidationError("SynthSpec: n_identities must be >= 1");
    if (samples_per_identity < 1) throw ValidationError("SynthSpec: samples_per_identity must be >= 1");
    if (d_raw < 1) throw ValidationError("SynthSpec: d_raw must be >= 1");
    if (n_cameras < 1) throw ValidationError("SynthSpec: n_cameras must be >= 1");
    if (!(camera_shift >= 0.0)) throw ValidationError("SynthSpec: camera_shift must be >= 0");
    if (!(cluster_spread > 0.0)) throw ValidationError("SynthSpec: cluster_spread must be > 0");
}

RawDataset generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int d = spec.d_raw;

    Mat centroids(spec.n_identities, d);
    for (double& v : centroids.data) v = rng.normal();

    // One offset direction per camera, scaled to norm camera_shift exactly.
    Mat cam_offsets(spec.n_cameras, d);
    for (int c = 0; c < spec.n_cameras; ++c) {
        double* row = cam_offsets.row(c);
        double norm = 0.0;
        for (int j = 0; j < d; ++j) {
            row[j] = rng.normal();
            norm += row[j] * row[j];
        }
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            row[0] = 1.0;
            norm = 1.0;
        }
        for (int j = 0; j < d; ++j) row[j] *= spec.camera_shift / norm;
    }

    const std::size_t n = static_cast<std::size_t>(spec.n_identities) * spec.samples_per_identity;
    RawDataset out;
    out.inputs = Mat(n, d);
    out.cameras.resize(n);
    out.gt_labels.resize(n);

    std::size_t row = 0;
    for (int id = 0; id < spec.n_identities; ++id) {
        for (int s = 0; s < spec.samples_per_identity; ++s, ++row) {
            const int cam = s % spec.n_cameras;
            double* x = out.inputs.row(row);
            const double* c = centroids.row(id);
            const double* o = cam_offsets.row(cam);
            for (int j = 0; j < d; ++j) x[j] = c[j] + spec.cluster_spread * rng.normal() + o[j];
            out.cameras[row] = cam;
            out.gt_labels[row] = id;
        }
    }
    return out;
}

// ---- CSV helpers ---------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no, const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& tok, const std::string& path, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') parse_fail(path, line_no, "not a number: '" + tok + "'");
    return v;
}

long parse_int(const std::string& tok, const std::string& path, std::size_t line_no) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0') parse_fail(path, line_no, "not an integer: '" + tok + "'");
    return v;
}

void write_double(std::FILE* f, double v) {
    std::fprintf(f, ",%.17g", v);
}

struct FileCloser {
    std::FILE* f;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

std::FILE* open_write(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

std::ifstream open_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    return in;
}

// Expects header columns id,camera,gt_label then `prefix`-numbered value
// columns, optionally followed by s_ score columns (embeddings only).
struct TabularHeader {
    std::size_t d = 0;
    std::size_t c = 0;  // score columns, 0 when absent
};

TabularHeader parse_feature_header(const std::vector<std::string>& cols, const char* prefix,
                                   bool allow_scores, const std::string& path) {
    if (cols.size() < 4 || cols[0] != "id" || cols[1] != "camera" || cols[2] != "gt_label")
        parse_fail(path, 1, "header must start with id,camera,gt_label");
    TabularHeader h;
    std::size_t i = 3;
    for (; i < cols.size(); ++i) {
        const std::string expect = std::string(prefix) + "_" + std::to_string(i - 3);
        if (cols[i] != expect) break;
        ++h.d;
    }
    if (h.d == 0) parse_fail(path, 1, std::string("expected ") + prefix + "_0 column");
    for (; i < cols.size(); ++i) {
        if (!allow_scores) parse_fail(path, 1, "unexpected column '" + cols[i] + "'");
        const std::string expect = "s_" + std::to_string(h.c);
        if (cols[i] != expect) parse_fail(path, 1, "unexpected column '" + cols[i] + "'");
        ++h.c;
    }
    return h;
}

}  // namespace

// ---- embeddings IO ---------------------------------------------------------------

void save_embeddings(const EmbeddingSet& set, const std::string& path) {
    std::FILE* f = open_write(path);
    FileCloser guard{f};
    std::fprintf(f, "id,camera,gt_label");
    for (std::size_t j = 0; j < set.dim(); ++j) std::fprintf(f, ",f_%zu", j);
    if (set.scores)
        for (std::size_t j = 0; j < set.scores->cols; ++j) std::fprintf(f, ",s_%zu", j);
    std::fprintf(f, "\n");
    for (std::size_t i = 0; i < set.n(); ++i) {
        const int gt = set.gt_labels ? (*set.gt_labels)[i] : -1;
        std::fprintf(f, "%zu,%d,%d", i, set.cameras[i], gt);
        for (std::size_t j = 0; j < set.dim(); ++j) write_double(f, set.features(i, j));
        if (set.scores)
            for (std::size_t j = 0; j < set.scores->cols; ++j) write_double(f, (*set.scores)(i, j));
        std::fprintf(f, "\n");
    }
    if (std::ferror(f)) throw IoError("write failed: " + path);
}

EmbeddingSet load_embeddings(const std::string& path) {
    std::ifstream in = open_read(path);
    std::string line;
    if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
    const TabularHeader h = parse_feature_header(split_csv(line), "f", true, path);

    std::vector<double> feats, scores;
    std::vector<int> cameras, gts;
    std::size_t line_no = 1, row = 0;
    bool any_gt = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 3 + h.d + h.c)
            parse_fail(path, line_no, "expected " + std::to_string(3 + h.d + h.c) + " columns, got " +
                                          std::to_string(cols.size()));
        if (static_cast<std::size_t>(parse_int(cols[0], path, line_no)) != row)
            parse_fail(path, line_no, "ids must be 0..n-1 in order");
        cameras.push_back(static_cast<int>(parse_int(cols[1], path, line_no)));
        const int gt = static_cast<int>(parse_int(cols[2], path, line_no));
        gts.push_back(gt);
        if (gt >= 0) any_gt = true;

        double norm2 = 0.0;
        for (std::size_t j = 0; j < h.d; ++j) {
            const double v = parse_double(cols[3 + j], path, line_no);
            feats.push_back(v);
            norm2 += v * v;
        }
        const double norm = std::sqrt(norm2);
        if (std::abs(norm - 1.0) > 1e-3)
            parse_fail(path, line_no, "feature row norm " + std::to_string(norm) + " deviates from 1");
        // renormalize away serialization rounding
        for (std::size_t j = feats.size() - h.d; j < feats.size(); ++j) feats[j] /= norm;

        double ssum = 0.0;
        for (std::size_t j = 0; j < h.c; ++j) {
            const double v = parse_double(cols[3 + h.d + j], path, line_no);
            if (v < 0.0) parse_fail(path, line_no, "negative score entry");
            scores.push_back(v);
            ssum += v;
        }
        if (h.c > 0 && std::abs(ssum - 1.0) > 1e-6)
            parse_fail(path, line_no, "score row sums to " + std::to_string(ssum));
        ++row;
    }
    if (row == 0) parse_fail(path, line_no, "no data rows");

    EmbeddingSet set;
    set.features = Mat(row, h.d);
    set.features.data = std::move(feats);
    if (h.c > 0) {
        Mat s(row, h.c);
        s.data = std::move(scores);
        set.scores = std::move(s);
    }
    set.cameras = std::move(cameras);
    if (any_gt) set.gt_labels = std::move(gts);
    set.validate();
    return set;
}

// ---- labels IO -------------------------------------------------------------------

void save_labels(const Labeling& lab, const std::string& path) {
    std::FILE* f = open_write(path);
    FileCloser guard{f};
    std::fprintf(f, "id,label\n");
    for (std::size_t i = 0; i < lab.size(); ++i) std::fprintf(f, "%zu,%d\n", i, lab.labels[i]);
    if (std::ferror(f)) throw IoError("write failed: " + path);
}

Labeling load_labels(const std::string& path) {
    std::ifstream in = open_read(path);
    std::string line;
    if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
    if (line != "id,label") parse_fail(path, 1, "expected header id,label");
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 2) parse_fail(path, line_no, "expected 2 columns");
        if (static_cast<std::size_t>(parse_int(cols[0], path, line_no)) != labels.size())
            parse_fail(path, line_no, "ids must be 0..n-1 in order");
        labels.push_back(static_cast<int>(parse_int(cols[1], path, line_no)));
    }
    return Labeling(std::move(labels));
}

// ---- raw IO ----------------------------------------------------------------------

void save_raw(const RawDataset& raw, const std::string& path) {
    std::FILE* f = open_write(path);
    FileCloser guard{f};
    std::fprintf(f, "id,camera,gt_label");
    for (std::size_t j = 0; j < raw.inputs.cols; ++j) std::fprintf(f, ",x_%zu", j);
    std::fprintf(f, "\n");
    for (std::size_t i = 0; i < raw.n(); ++i) {
        std::fprintf(f, "%zu,%d,%d", i, raw.cameras[i], raw.gt_labels[i]);
        for (std::size_t j = 0; j < raw.inputs.cols; ++j) write_double(f, raw.inputs(i, j));
        std::fprintf(f, "\n");
    }
    if (std::ferror(f)) throw IoError("write failed: " + path);
}

RawDataset load_raw(const std::string& path) {
    std::ifstream in = open_read(path);
    std::string line;
    if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
    const TabularHeader h = parse_feature_header(split_csv(line), "x", false, path);

    RawDataset raw;
    std::vector<double> vals;
    std::size_t line_no = 1, row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 3 + h.d) parse_fail(path, line_no, "wrong column count");
        if (static_cast<std::size_t>(parse_int(cols[0], path, line_no)) != row)
            parse_fail(path, line_no, "ids must be 0..n-1 in order");
        raw.cameras.push_back(static_cast<int>(parse_int(cols[1], path, line_no)));
        raw.gt_labels.push_back(static_cast<int>(parse_int(cols[2], path, line_no)));
        for (std::size_t j = 0; j < h.d; ++j) vals.push_back(parse_double(cols[3 + j], path, line_no));
        ++row;
    }
    if (row == 0) parse_fail(path, line_no, "no data rows");
    raw.inputs = Mat(row, h.d);
    raw.inputs.data = std::move(vals);
    return raw;
}

}  // namespace glc
