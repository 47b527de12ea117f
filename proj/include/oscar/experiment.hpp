#pragma once

#include <string>
#include <vector>

#include "oscar/diagnostics.hpp"

namespace oscar {

/// Declarative run description, parsed from JSON. Field names here mirror the
/// config schema in README.md.
struct ExperimentConfig {
    ProfileSpec profile;
    int grid_n = 256;
    std::vector<int> ks{1};
    std::vector<double> nus{1e-3};
    std::vector<std::string> routes{"direct"};
    double t_start = 0.25, t_step = 0.25, t_stop = 20;
    // initial condition: "fourier" (mode list) or "bump" (center/width)
    std::string ic_type = "fourier";
    std::vector<std::array<double, 3>> ic_modes{{1, 1, 0}};  // m, re, im
    double ic_center = 0, ic_width = 1;
    bool lap_scan = false;
    int lap_lambda_count = 9;
    double gamma = 15.0 / 8.0;
    double sigma_sharp = 0.02;
    double c_dagger = 10.0;
    bool fit = true;
    double rate_t_lo = 5, rate_t_hi = 50;
    std::string out_dir = ".";
    unsigned seed = 7;
    std::string snapshot;  // raw JSON text, echoed into the manifest
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

ComplexField initial_condition(const ExperimentConfig& cfg, const Grid& grid);

RunManifest run_experiment(const ExperimentConfig& cfg, int threads = 0);

/// Chunked thread-pool map over [0, n); threads = 0 reads OSCAR_THREADS, then
/// hardware_concurrency.
void parallel_for(int n, const std::function<void(int)>& body, int threads = 0);

}  // namespace oscar
