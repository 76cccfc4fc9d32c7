#include "glc/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "glc/errors.hpp"

namespace glc {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw ValidationError("config: " + key + ": not a number: '" + value + "'");
    return v;
}

long long to_int(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw ValidationError("config: " + key + ": not an integer: '" + value + "'");
    return v;
}

void check(bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("config: ") + what);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::validate() const {
    check(lambda >= 0.0 && lambda <= 1.0, "lambda must be in [0, 1]");
    check(k >= 1, "k must be >= 1");
    check(tau1 >= 0.0 && tau1 <= 2.0, "tau1 must be in [0, 2]");
    check(tau2 >= 0.0 && tau2 <= 2.0, "tau2 must be in [0, 2]");
    check(t_e >= 1, "t_e must be >= 1");
    check(gamma >= 0.0, "gamma must be >= 0");
    check(lr > 0.0, "lr must be > 0");
    check(weight_decay >= 0.0, "weight_decay must be >= 0");
    check(gcn_layers >= 1, "gcn_layers must be >= 1");
    check(epochs >= 1, "epochs must be >= 1");
    check(inner_steps >= 0, "inner_steps must be >= 0");
    check(p_s >= 0.0 && p_s <= 1.0, "p_s must be in [0, 1]");
    check(t_c >= 1, "t_c must be >= 1");
    check(p_r >= 0.0 && p_r <= 1.0, "p_r must be in [0, 1]");
    check(d >= 1, "d must be >= 1");
    check(extractor_lr > 0.0, "extractor_lr must be > 0");
    dbscan_params().validate();
    synth_spec().validate();
}

SynthSpec RunConfig::synth_spec() const {
    SynthSpec s;
    s.n_identities = n_identities;
    s.samples_per_identity = samples_per_identity;
    s.d_raw = d_raw;
    s.n_cameras = n_cameras;
    s.camera_shift = camera_shift;
    s.cluster_spread = cluster_spread;
    s.seed = seed;
    return s;
}

DbscanParams RunConfig::dbscan_params() const {
    DbscanParams p;
    p.eps = eps;
    p.min_pts = min_pts;
    return p;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "lambda") lambda = to_double(key, value);
    else if (key == "k") k = static_cast<int>(to_int(key, value));
    else if (key == "tau1") tau1 = to_double(key, value);
    else if (key == "tau2") tau2 = to_double(key, value);
    else if (key == "t_e") t_e = static_cast<int>(to_int(key, value));
    else if (key == "gamma") gamma = to_double(key, value);
    else if (key == "lr") lr = to_double(key, value);
    else if (key == "weight_decay") weight_decay = to_double(key, value);
    else if (key == "gcn_layers") gcn_layers = static_cast<int>(to_int(key, value));
    else if (key == "epochs") epochs = static_cast<int>(to_int(key, value));
    else if (key == "inner_steps") inner_steps = static_cast<int>(to_int(key, value));
    else if (key == "p_s") p_s = to_double(key, value);
    else if (key == "t_c") t_c = static_cast<int>(to_int(key, value));
    else if (key == "p_r") p_r = to_double(key, value);
    else if (key == "eps") eps = to_double(key, value);
    else if (key == "min_pts") min_pts = static_cast<int>(to_int(key, value));
    else if (key == "d") d = static_cast<int>(to_int(key, value));
    else if (key == "extractor_lr") extractor_lr = to_double(key, value);
    else if (key == "n_identities") n_identities = static_cast<int>(to_int(key, value));
    else if (key == "samples_per_identity") samples_per_identity = static_cast<int>(to_int(key, value));
    else if (key == "d_raw") d_raw = static_cast<int>(to_int(key, value));
    else if (key == "n_cameras") n_cameras = static_cast<int>(to_int(key, value));
    else if (key == "camera_shift") camera_shift = to_double(key, value);
    else if (key == "cluster_spread") cluster_spread = to_double(key, value);
    else if (key == "seed") seed = static_cast<std::uint64_t>(to_int(key, value));
    else throw ParseError("config: unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::items() const {
    return {
        {"lambda", fmt_double(lambda)},
        {"k", std::to_string(k)},
        {"tau1", fmt_double(tau1)},
        {"tau2", fmt_double(tau2)},
        {"t_e", std::to_string(t_e)},
        {"gamma", fmt_double(gamma)},
        {"lr", fmt_double(lr)},
        {"weight_decay", fmt_double(weight_decay)},
        {"gcn_layers", std::to_string(gcn_layers)},
        {"epochs", std::to_string(epochs)},
        {"inner_steps", std::to_string(inner_steps)},
        {"p_s", fmt_double(p_s)},
        {"t_c", std::to_string(t_c)},
        {"p_r", fmt_double(p_r)},
        {"eps", fmt_double(eps)},
        {"min_pts", std::to_string(min_pts)},
        {"d", std::to_string(d)},
        {"extractor_lr", fmt_double(extractor_lr)},
        {"n_identities", std::to_string(n_identities)},
        {"samples_per_identity", std::to_string(samples_per_identity)},
        {"d_raw", std::to_string(d_raw)},
        {"n_cameras", std::to_string(n_cameras)},
        {"camera_shift", fmt_double(camera_shift)},
        {"cluster_spread", fmt_double(cluster_spread)},
        {"seed", std::to_string(seed)},
    };
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected key=value");
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

}  // namespace glc
