#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glc/clustering.hpp"
#include "glc/dataset.hpp"

namespace glc {

// Every knob of the pipeline in one place. Defaults are the working
// configuration of the synthetic harness; a config file (flat key=value,
// '#' comments) or CLI flags override individual fields by name.
struct RunConfig {
    // graph construction + correction
    double lambda = 0.5;
    int k = 50;
    double tau1 = 0.6;
    double tau2 = 0.6;
    int t_e = 250;
    double gamma = 2.0;
    double lr = 0.1;
    double weight_decay = 1e-5;
    int gcn_layers = 1;

    // self-training loop
    int epochs = 30;
    int inner_steps = 300;
    double p_s = 0.2;
    int t_c = 2;
    double p_r = 0.8;

    // baseline clustering
    double eps = 0.4;
    int min_pts = 4;

    // toy extractor
    int d = 16;
    double extractor_lr = 1.0;

    // synthetic data
    int n_identities = 30;
    int samples_per_identity = 20;
    int d_raw = 16;
    int n_cameras = 4;
    double camera_shift = 2.0;
    double cluster_spread = 0.4;

    std::uint64_t seed = 1;

    void validate() const;

    SynthSpec synth_spec() const;
    DbscanParams dbscan_params() const;

    // Sets one field by name; throws ParseError for unknown keys and
    // ValidationError for unparseable values.
    void set(const std::string& key, const std::string& value);

    // All fields as ordered (key, value) pairs, values formatted losslessly.
    std::vector<std::pair<std::string, std::string>> items() const;
};

// Parses a key=value config file into `cfg` (later keys win). Unknown keys
// are rejected.
void load_config_file(RunConfig& cfg, const std::string& path);

}  // namespace glc
