// Command-line front end: generate / cluster / correct / selftrain / eval /
// grid. Every run echoes its fully-resolved configuration into the JSON
// report so results are reproducible from the report alone.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "glc/clustering.hpp"
#include "glc/config.hpp"
#include "glc/correction.hpp"
#include "glc/dataset.hpp"
#include "glc/errors.hpp"
#include "glc/knn_graph.hpp"
#include "glc/metrics.hpp"
#include "glc/rng.hpp"
#include "glc/selftrain.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kWarmupEpochs = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
};

// Registers --config/--out plus one override flag per RunConfig field.
// Overrides are applied after the config file so flags win.
void add_common(CLI::App* cmd, glc::RunConfig& cfg, CommonOpts& opts,
                std::vector<std::pair<std::string, std::string>>& overrides) {
    cmd->add_option("--config", opts.config_path, "key=value config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    for (const auto& [key, value] : cfg.items()) {
        (void)value;
        const std::string name = "--" + key;
        cmd->add_option_function<std::string>(
            name, [&overrides, k = key](const std::string& v) { overrides.emplace_back(k, v); },
            "override config field " + key);
    }
}

void resolve_config(glc::RunConfig& cfg, const CommonOpts& opts,
                    const std::vector<std::pair<std::string, std::string>>& overrides) {
    if (!opts.config_path.empty()) glc::load_config_file(cfg, opts.config_path);
    for (const auto& [key, value] : overrides) cfg.set(key, value);
    cfg.validate();
}

json config_json(const glc::RunConfig& cfg) {
    json j;
    for (const auto& [key, value] : cfg.items()) j[key] = value;
    return j;
}

fs::path ensure_out_dir(const CommonOpts& opts) {
    if (opts.out_dir.empty()) throw glc::ValidationError("--out directory is required");
    fs::path dir(opts.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw glc::IoError("cannot create output directory: " + dir.string());
    return dir;
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw glc::IoError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw glc::IoError("write failed: " + path.string());
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json metric_json(const glc::MetricReport& m) {
    json j;
    j["nmi"] = m.nmi;
    j["pair_precision"] = m.pair_precision;
    j["pair_recall"] = m.pair_recall;
    j["pair_f"] = m.pair_f;
    j["n_outliers"] = m.n_outliers;
    if (m.graph_recall) j["graph_recall"] = *m.graph_recall;
    if (m.map) j["map"] = *m.map;
    return j;
}

void write_history_csv(const std::vector<glc::EpochRecord>& history, const fs::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw glc::IoError("cannot open for writing: " + path.string());
    std::fprintf(f, "epoch,nmi,pair_f,n_outliers,map,edges_removed_conf,edges_removed_nc,restarted,"
                    "glc_applied\n");
    for (const glc::EpochRecord& r : history) {
        std::fprintf(f, "%d,%.17g,%.17g,%d,%.17g,%zu,%zu,%d,%d\n", r.epoch, r.nmi, r.pair_f,
                     r.n_outliers, r.map, r.edges_removed_conf, r.edges_removed_nc,
                     r.restarted ? 1 : 0, r.glc_applied ? 1 : 0);
    }
    const bool bad = std::ferror(f) != 0;
    std::fclose(f);
    if (bad) throw glc::IoError("write failed: " + path.string());
}

int cmd_generate(const glc::RunConfig& cfg, const CommonOpts& opts) {
    const fs::path dir = ensure_out_dir(opts);
    const glc::RawDataset raw = glc::generate_synthetic(cfg.synth_spec());
    glc::save_raw(raw, (dir / "raw.csv").string());
    glc::save_labels(glc::Labeling(raw.gt_labels), (dir / "gt.csv").string());

    // embeddings with trained classifier scores, from a short warmup
    const glc::EmbeddingSet set = glc::warmup_embeddings(raw, cfg, kWarmupEpochs, cfg.seed);
    glc::save_embeddings(set, (dir / "embeddings.csv").string());

    json report;
    report["command"] = "generate";
    report["config"] = config_json(cfg);
    report["n"] = raw.n();
    report["warmup_epochs"] = kWarmupEpochs;
    report["files"] = {"raw.csv", "embeddings.csv", "gt.csv"};
    write_json(report, dir / "report.json");
    return 0;
}

int cmd_cluster(const glc::RunConfig& cfg, const CommonOpts& opts, const std::string& embeddings_path,
                const std::string& algo, int kmeans_k) {
    const fs::path dir = ensure_out_dir(opts);
    const glc::EmbeddingSet set = glc::load_embeddings(embeddings_path);
    glc::Labeling lab;
    if (algo == "dbscan") {
        lab = glc::dbscan(set, cfg.dbscan_params());
    } else if (algo == "kmeans") {
        lab = glc::kmeans(set, kmeans_k, cfg.seed);
    } else {
        throw glc::ValidationError("unknown clustering algorithm: " + algo);
    }
    glc::save_labels(lab, (dir / "labels.csv").string());

    json report;
    report["command"] = "cluster";
    report["config"] = config_json(cfg);
    report["algo"] = algo;
    report["n_clusters"] = lab.n_clusters;
    report["n_outliers"] = lab.n_outliers();
    if (set.gt_labels) report["metrics"] = metric_json(glc::evaluate(lab, *set.gt_labels));
    write_json(report, dir / "report.json");
    return 0;
}

int cmd_correct(const glc::RunConfig& cfg, const CommonOpts& opts, const std::string& embeddings_path,
                const std::string& labels_path, const std::string& dump_graph) {
    const fs::path dir = ensure_out_dir(opts);
    const glc::EmbeddingSet set = glc::load_embeddings(embeddings_path);
    const glc::Labeling lab = glc::load_labels(labels_path);
    const glc::CorrectionResult res = glc::correct(set, lab, cfg, cfg.seed);
    glc::save_labels(res.corrected, (dir / "corrected.csv").string());

    if (!dump_graph.empty()) {
        const glc::Mat sim = glc::joint_similarity(set, cfg.lambda);
        const glc::KnnGraph g = glc::build_knn_graph(sim, cfg.k, std::vector<char>(set.n(), 1));
        glc::save_graph(g, dump_graph);
    }

    json report;
    report["command"] = "correct";
    report["config"] = config_json(cfg);
    report["n_clusters_before"] = lab.n_clusters;
    report["n_clusters_after"] = res.corrected.n_clusters;
    report["n_outliers_before"] = res.n_outliers_before;
    report["n_outliers_after"] = res.n_outliers_after;
    report["edges_removed_conf"] = res.edges_removed_conf;
    report["edges_removed_nc"] = res.edges_removed_nc;
    report["iterations"] = res.train_report.iterations;
    report["stop_reason"] = res.train_report.stop_reason;
    report["loss_first"] = res.train_report.loss.front();
    report["loss_last"] = res.train_report.loss.back();
    if (set.gt_labels) {
        report["metrics_before"] = metric_json(glc::evaluate(lab, *set.gt_labels));
        report["metrics_after"] = metric_json(glc::evaluate(res.corrected, *set.gt_labels));
    }
    write_json(report, dir / "report.json");
    return 0;
}

int cmd_selftrain(const glc::RunConfig& cfg, const CommonOpts& opts, const std::string& raw_path,
                  const std::string& glc_mode) {
    const fs::path dir = ensure_out_dir(opts);
    if (glc_mode != "on" && glc_mode != "off")
        throw glc::ValidationError("--glc must be 'on' or 'off'");
    const glc::RawDataset raw =
        raw_path.empty() ? glc::generate_synthetic(cfg.synth_spec()) : glc::load_raw(raw_path);
    const glc::LoopResult res = glc::run_loop(raw, cfg, glc_mode == "on", cfg.seed);
    write_history_csv(res.history, dir / "history.csv");
    glc::save_labels(res.final_labels, (dir / "final_labels.csv").string());

    glc::MetricReport final_metrics = glc::evaluate(res.final_labels, raw.gt_labels);
    final_metrics.map = res.history.back().map;

    json report;
    report["command"] = "selftrain";
    report["config"] = config_json(cfg);
    report["glc"] = glc_mode;
    report["epochs_run"] = res.history.size();
    report["final"] = metric_json(final_metrics);
    write_json(report, dir / "report.json");
    return 0;
}

int cmd_eval(const glc::RunConfig& cfg, const CommonOpts& opts, const std::string& labels_path,
             const std::string& gt_path, const std::string& graph_path) {
    const glc::Labeling pred = glc::load_labels(labels_path);
    const glc::Labeling gt = glc::load_labels(gt_path);
    for (int v : gt.labels)
        if (v < 0) throw glc::ValidationError("eval: ground truth contains outliers");
    glc::MetricReport m = glc::evaluate(pred, gt.labels);
    if (!graph_path.empty()) m.graph_recall = glc::graph_recall(glc::load_graph(graph_path), gt.labels);

    json report;
    report["command"] = "eval";
    report["config"] = config_json(cfg);
    report["metrics"] = metric_json(m);
    std::printf("%s\n", report.dump(2).c_str());
    if (!opts.out_dir.empty()) write_json(report, ensure_out_dir(opts) / "report.json");
    return 0;
}

int cmd_grid(const glc::RunConfig& cfg, const CommonOpts& opts, const std::string& embeddings_path,
             const std::string& labels_path, std::vector<double> tau1s, std::vector<double> tau2s) {
    const fs::path dir = ensure_out_dir(opts);
    if (tau1s.empty()) tau1s = {0.0, 0.3, 0.6, 0.9};
    if (tau2s.empty()) tau2s = {0.0, 0.3, 0.6, 0.9};
    const glc::EmbeddingSet set = glc::load_embeddings(embeddings_path);
    const glc::Labeling lab = glc::load_labels(labels_path);
    const glc::Mat surface = glc::threshold_grid(set, lab, cfg, tau1s, tau2s);

    std::FILE* f = std::fopen((dir / "grid.csv").string().c_str(), "w");
    if (!f) throw glc::IoError("cannot open for writing: " + (dir / "grid.csv").string());
    std::fprintf(f, "tau1\\tau2");
    for (double t2 : tau2s) std::fprintf(f, ",%s", fmt17(t2).c_str());
    std::fprintf(f, "\n");
    for (std::size_t a = 0; a < tau1s.size(); ++a) {
        std::fprintf(f, "%s", fmt17(tau1s[a]).c_str());
        for (std::size_t b = 0; b < tau2s.size(); ++b)
            std::fprintf(f, ",%s", fmt17(surface(a, b)).c_str());
        std::fprintf(f, "\n");
    }
    const bool bad = std::ferror(f) != 0;
    std::fclose(f);
    if (bad) throw glc::IoError("write failed: grid.csv");

    json report;
    report["command"] = "grid";
    report["config"] = config_json(cfg);
    report["tau1"] = tau1s;
    report["tau2"] = tau2s;
    write_json(report, dir / "report.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph-based pseudo-label correction"};
    app.require_subcommand(1);

    glc::RunConfig cfg;
    CommonOpts opts;
    std::vector<std::pair<std::string, std::string>> overrides;

    auto* generate = app.add_subcommand("generate", "synthesize a dataset (raw + embeddings + gt)");
    add_common(generate, cfg, opts, overrides);

    std::string embeddings_path, labels_path, gt_path, graph_path, raw_path, dump_graph;
    std::string algo = "dbscan";
    std::string glc_mode = "on";
    int kmeans_k = 30;
    std::vector<double> tau1s, tau2s;

    auto* cluster = app.add_subcommand("cluster", "cluster an embeddings file");
    add_common(cluster, cfg, opts, overrides);
    cluster->add_option("--embeddings", embeddings_path, "embeddings CSV")->required();
    cluster->add_option("--algo", algo, "dbscan or kmeans");
    cluster->add_option("--kmeans-k", kmeans_k, "cluster count for kmeans");

    auto* correct = app.add_subcommand("correct", "train the correction network and refine labels");
    add_common(correct, cfg, opts, overrides);
    correct->add_option("--embeddings", embeddings_path, "embeddings CSV")->required();
    correct->add_option("--labels", labels_path, "labels CSV to correct")->required();
    correct->add_option("--dump-graph", dump_graph, "write the inference kNN graph edge list here");

    auto* selftrain = app.add_subcommand("selftrain", "run the full self-training loop");
    add_common(selftrain, cfg, opts, overrides);
    selftrain->add_option("--glc", glc_mode, "on or off (label correction in the loop)");
    selftrain->add_option("--raw", raw_path, "raw dataset CSV (default: synthesize from config)");

    auto* eval = app.add_subcommand("eval", "score a labels file against ground truth");
    add_common(eval, cfg, opts, overrides);
    eval->add_option("--labels", labels_path, "predicted labels CSV")->required();
    eval->add_option("--gt", gt_path, "ground-truth labels CSV")->required();
    eval->add_option("--graph", graph_path, "optional graph edge list for graph recall");

    auto* grid = app.add_subcommand("grid", "NMI surface over a tau1 x tau2 grid");
    add_common(grid, cfg, opts, overrides);
    grid->add_option("--embeddings", embeddings_path, "embeddings CSV")->required();
    grid->add_option("--labels", labels_path, "labels CSV")->required();
    grid->add_option("--tau1-grid", tau1s, "comma-separated tau1 grid values")->delimiter(',');
    grid->add_option("--tau2-grid", tau2s, "comma-separated tau2 grid values")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        resolve_config(cfg, opts, overrides);
        if (generate->parsed()) return cmd_generate(cfg, opts);
        if (cluster->parsed()) return cmd_cluster(cfg, opts, embeddings_path, algo, kmeans_k);
        if (correct->parsed()) return cmd_correct(cfg, opts, embeddings_path, labels_path, dump_graph);
        if (selftrain->parsed()) return cmd_selftrain(cfg, opts, raw_path, glc_mode);
        if (eval->parsed()) return cmd_eval(cfg, opts, labels_path, gt_path, graph_path);
        if (grid->parsed()) return cmd_grid(cfg, opts, embeddings_path, labels_path, tau1s, tau2s);
    } catch (const glc::IoError& e) {
        std::fprintf(stderr, "error: kind=io msg=\"%s\"\n", e.what());
        return 2;
    } catch (const glc::ParseError& e) {
        std::fprintf(stderr, "error: kind=schema msg=\"%s\"\n", e.what());
        return 3;
    } catch (const glc::ValidationError& e) {
        std::fprintf(stderr, "error: kind=config msg=\"%s\"\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: kind=internal msg=\"%s\"\n", e.what());
        return 1;
    }
    return 1;
}
