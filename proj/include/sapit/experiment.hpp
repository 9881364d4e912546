#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sapit/state_evolution.hpp"

namespace sapit {

struct ExperimentConfig {
    std::string kind = "mse-vs-iteration";  // | ber-vs-power | rate-vs-N | se-only | rate-only
    int N = 256, M = 256, K = 32, N_P = 20, Q = 64, T = 1;
    std::string tx_mod = "qpsk";  // bpsk | qpsk | 8psk | 16qam | 64qam
    int ris_order = 2;
    bool coded = false;
    std::string mode = "joint";  // joint | separate | uncoded
    bool direct_link = true;
    std::string genie = "none";  // none | known_s | known_x
    double csi_nmse_db = -std::numeric_limits<double>::infinity();
    std::vector<double> power_dbm = {12.0};
    std::vector<int> sweep_n;
    int trials = 20;
    std::uint64_t seed = 1;
    int iters = 20;
    double noise_var = 1e-12;
    int se_samples = 100000;
    int rate_paths = 10;
    int rate_path_points = 24;
    int rate_mc = 20000;
    std::string out = ".";
    int threads = 0;  // 0 = auto
    std::vector<std::string> warnings;
};

// Flat key = value parser ('#' comments, [sections] ignored). Unknown keys,
// malformed values, and range violations are reported together.
ExperimentConfig parse_config_text(const std::string& text,
                                   std::vector<std::string>& errors);
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

// Canonical serialization used for the provenance hash embedded in CSVs.
std::string normalized_text(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

std::vector<std::string> list_presets();
std::string preset_text(const std::string& name);  // throws on unknown name

Constellation make_tx_constellation(const std::string& name);

// Normalized scalar-recursion parameters implied by the physical setup at a
// given transmit power (expected channel Frobenius norms from the path-loss
// geometry).
SeConfig make_se_config(const ExperimentConfig& cfg, double power_dbm);

// Runs the experiment and writes CSV + plot script into cfg.out. Returns 0 on
// success, 3 when more than 10% of trials diverged. Throws on I/O failure.
int run_experiment(const ExperimentConfig& cfg);

}  // namespace sapit
