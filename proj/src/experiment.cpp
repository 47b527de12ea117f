#include "oscar/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "oscar/cutoff.hpp"
#include "oscar/field_io.hpp"

namespace oscar {

using nlohmann::json;

void parallel_for(int n, const std::function<void(int)>& body, int threads) {
    if (threads <= 0) {
        if (const char* env = std::getenv("OSCAR_THREADS")) threads = std::atoi(env);
        if (threads <= 0) threads = (int)std::thread::hardware_concurrency();
        if (threads <= 0) threads = 1;
    }
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

namespace {

/// Fetch a required field, naming it in the error.
template <class T>
T require(const json& j, const std::string& scope, const std::string& key) {
    if (!j.contains(key)) throw ConfigInvalid("missing field: " + scope + "." + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigInvalid("bad type for field: " + scope + "." + key);
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.snapshot = j.dump();

    if (!j.contains("profile")) throw ConfigInvalid("missing field: profile");
    const json& p = j["profile"];
    cfg.profile.family = p.value("family", "kolmogorov");
    cfg.profile.period = require<double>(p, "profile", "period");
    if (p.contains("samples")) cfg.profile.samples = p["samples"].get<std::vector<double>>();

    if (j.contains("grid")) cfg.grid_n = require<int>(j["grid"], "grid", "n");
    if (j.contains("k")) cfg.ks = j["k"].get<std::vector<int>>();
    if (j.contains("nu")) cfg.nus = j["nu"].get<std::vector<double>>();
    if (j.contains("routes")) cfg.routes = j["routes"].get<std::vector<std::string>>();
    for (const auto& r : cfg.routes)
        if (r != "direct" && r != "contour")
            throw ConfigInvalid("routes entries must be 'direct' or 'contour'");
    if (j.contains("t")) {
        const json& t = j["t"];
        cfg.t_start = require<double>(t, "t", "start");
        cfg.t_step = require<double>(t, "t", "step");
        cfg.t_stop = require<double>(t, "t", "stop");
        if (cfg.t_step <= 0 || cfg.t_stop < cfg.t_start)
            throw ConfigInvalid("bad time range in field: t");
    }
    if (j.contains("ic")) {
        const json& ic = j["ic"];
        cfg.ic_type = ic.value("type", "fourier");
        if (cfg.ic_type == "fourier") {
            if (ic.contains("modes")) {
                cfg.ic_modes.clear();
                for (const auto& m : ic["modes"])
                    cfg.ic_modes.push_back({m.at(0).get<double>(), m.at(1).get<double>(),
                                            m.at(2).get<double>()});
            }
        } else if (cfg.ic_type == "bump") {
            cfg.ic_center = require<double>(ic, "ic", "center");
            cfg.ic_width = require<double>(ic, "ic", "width");
        } else {
            throw ConfigInvalid("ic.type must be 'fourier' or 'bump'");
        }
    }
    if (j.contains("lap")) {
        cfg.lap_scan = j["lap"].value("enabled", true);
        cfg.lap_lambda_count = j["lap"].value("lambda_count", 9);
        cfg.gamma = j["lap"].value("gamma", cfg.gamma);
    }
    if (j.contains("rates")) {
        cfg.fit = j["rates"].value("enabled", true);
        cfg.rate_t_lo = j["rates"].value("t_lo", cfg.rate_t_lo);
        cfg.rate_t_hi = j["rates"].value("t_hi", cfg.rate_t_hi);
    }
    cfg.sigma_sharp = j.value("sigma_sharp", cfg.sigma_sharp);
    cfg.c_dagger = j.value("c_dagger", cfg.c_dagger);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.seed = j.value("seed", cfg.seed);
    if (cfg.gamma < 15.0 / 8.0 || cfg.gamma >= 2.0)
        throw ConfigInvalid("lap.gamma must lie in [15/8, 2)");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ComplexField initial_condition(const ExperimentConfig& cfg, const Grid& grid) {
    const int N = grid.size();
    ComplexField w = ComplexField::Zero(N);
    if (cfg.ic_type == "bump") {
        for (int m = 0; m < N; ++m) {
            double s = grid.periodic_distance(grid.nodes()[m], cfg.ic_center);
            w[m] = phi0(s / cfg.ic_width);
        }
        return w;
    }
    for (const auto& mode : cfg.ic_modes) {
        Complex c(mode[1], mode[2]);
        for (int m = 0; m < N; ++m)
            w[m] += c * std::exp(Complex(0, 2 * M_PI * mode[0] * grid.nodes()[m] /
                                                grid.period()));
    }
    return w;
}

RunManifest run_experiment(const ExperimentConfig& cfg, int threads) {
    namespace fs = std::filesystem;
    auto t_start = std::chrono::steady_clock::now();

    ShearProfile profile = build_profile(cfg.profile);
    Grid grid(cfg.grid_n, cfg.profile.period);
    fs::create_directories(cfg.out_dir);

    RunManifest man;
    man.config_snapshot = cfg.snapshot.empty() ? "{}" : cfg.snapshot;
    man.grid_n = cfg.grid_n;
    man.grid_period = cfg.profile.period;
    man.c_dagger = cfg.c_dagger;
    man.sigma_sharp = cfg.sigma_sharp;
    man.sigma0 = 0.05;
    // profile identity: checksum of sampled values
    {
        ComplexField samples(64);
        for (int m = 0; m < 64; ++m)
            samples[m] = profile.b(m * cfg.profile.period / 64);
        std::ostringstream hs;
        hs << std::hex
           << std::hash<std::string>{}(std::string((const char*)samples.data(),
                                                   64 * sizeof(Complex)));
        man.profile_hash = hs.str();
    }

    std::vector<double> t_grid;
    for (double t = cfg.t_start; t <= cfg.t_stop + 1e-12; t += cfg.t_step)
        t_grid.push_back(t);

    std::mutex io_mutex;
    auto emit = [&](const std::string& name, const std::string& text) {
        std::lock_guard<std::mutex> lock(io_mutex);
        fs::path path = fs::path(cfg.out_dir) / name;
        std::ofstream out(path);
        out << text;
        out.close();
        man.artifacts.push_back({name, file_checksum(path.string())});
    };

    ComplexField w0 = initial_condition(cfg, grid);

    struct Job {
        int k;
        double nu;
    };
    std::vector<Job> jobs;
    for (int k : cfg.ks)
        for (double nu : cfg.nus) jobs.push_back({k, nu});

    parallel_for((int)jobs.size(), [&](int qi) {
        const Job& job = jobs[qi];
        std::ostringstream tag;
        tag << "k" << job.k << "_nu" << job.nu;
        for (const auto& route : cfg.routes) {
            EvolutionState st;
            if (route == "direct") {
                st = evolve_direct(profile, grid, job.k, job.nu, w0, t_grid);
            } else {
                double alpha = -cfg.sigma_sharp * std::sqrt(job.nu / job.k);
                ContourPlan plan =
                    make_contour_plan(profile, job.k, job.nu, cfg.t_stop, alpha);
                st = evolve_contour(profile, grid, job.k, job.nu, w0, plan, t_grid);
            }
            // final-time field snapshot
            {
                std::ostringstream csv;
                csv << "y,re,im\n";
                for (int m = 0; m < grid.size(); ++m)
                    csv << format_full(grid.nodes()[m]) << ","
                        << format_full(st.omega.back()[m].real()) << ","
                        << format_full(st.omega.back()[m].imag()) << "\n";
                emit("omega_" + route + "_" + tag.str() + ".csv", csv.str());
            }
            if (cfg.fit) {
                RateSpec rs;
                rs.t_lo = cfg.rate_t_lo;
                rs.t_hi = cfg.rate_t_hi;
                rs.gamma = cfg.gamma;
                rs.sigma_sharp = cfg.sigma_sharp;
                rs.seed = cfg.seed;
                try {
                    auto fits = fit_rates(st, grid, profile, rs);
                    json out = json::array();
                    for (const auto& f : fits)
                        out.push_back({{"quantity", f.quantity},
                                       {"window", {f.t_lo, f.t_hi}},
                                       {"exponent", f.exponent},
                                       {"rate", f.rate},
                                       {"uncertainty", f.uncertainty},
                                       {"r2", f.r2}});
                    emit("rates_" + route + "_" + tag.str() + ".json", out.dump(2) + "\n");
                } catch (const WindowTooShort&) {
                    // trajectory shorter than the fit window; skip the artifact
                }
            }
        }
        if (cfg.lap_scan) {
            json rows = json::array();
            for (int j = 0; j < 2; ++j) {
                double c = profile.critical_values()[j];
                double hw = profile.sigma_halfwidth(j);
                for (int i = 0; i < cfg.lap_lambda_count; ++i) {
                    double lambda = c - hw + (2.0 * hw * (i + 0.5)) / cfg.lap_lambda_count;
                    SpectralPoint pt(lambda, 0.0, job.nu, job.k, cfg.sigma_sharp);
                    GeometryConfig gc;
                    gc.c_dagger = cfg.c_dagger;
                    ParamGeometry geo = param_geometry(profile, pt, gc);
                    WeightedNormSpec spec{0.0, -cfg.gamma, cfg.gamma, j};
                    LapRow row = lap_constant(profile, pt, geo, grid, spec, j);
                    rows.push_back({{"lambda", row.lambda},
                                    {"regime", row.degenerate ? "degenerate" : "nondegenerate"},
                                    {"kappa2", row.kappa2},
                                    {"kappa_mixed", row.kappa_mixed},
                                    {"Tnorm", row.t_norm},
                                    {"pieces",
                                     {{"I1", row.pieces[0]},
                                      {"I2", row.pieces[1]},
                                      {"v1", row.pieces[2]},
                                      {"v2", row.pieces[3]}}}});
                }
            }
            emit("lap_" + tag.str() + ".json", rows.dump(2) + "\n");
        }
    }, threads);

    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    man.write((fs::path(cfg.out_dir) / "manifest.json").string());
    return man;
}

}  // namespace oscar
