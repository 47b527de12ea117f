#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "oscar/experiment.hpp"
#include "oscar/field_io.hpp"

using namespace oscar;
using nlohmann::json;

namespace {

std::vector<double> parse_time_range(const std::string& s) {
    // "start:step:stop"
    double a, h, b;
    char c1, c2;
    std::istringstream is(s);
    if (!(is >> a >> c1 >> h >> c2 >> b) || c1 != ':' || c2 != ':' || h <= 0)
        throw ConfigInvalid("time range must be start:step:stop");
    std::vector<double> t;
    for (double v = a; v <= b + 1e-12; v += h) t.push_back(v);
    return t;
}

ComplexField read_ic(const std::string& path, const Grid& grid) {
    ComplexField v = read_field_csv(path);
    if ((int)v.size() != grid.size())
        throw ConfigInvalid("initial condition length does not match the grid");
    return v;
}

json point_json(const SpectralPoint& pt) {
    return {{"lambda", pt.lambda}, {"alpha", pt.alpha}, {"nu", pt.nu}, {"k", pt.k}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oscar: resolvent and evolution toolkit for periodic shear flows"};
    app.require_subcommand(1);

    std::string config_path, out_path = "oscar_out";
    int threads = 0;
    unsigned seed = 7;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_path, "output file or directory");
    app.add_option("--threads", threads, "worker threads (0: OSCAR_THREADS or all)");
    app.add_option("--seed", seed, "bootstrap resampling seed");

    double period = 8.0, nu = 1e-3, lambda = 0.5, alpha = 0.0, gamma = 15.0 / 8.0;
    int n = 256, k = 1, j = 0, lambda_count = 9;
    std::string family = "kolmogorov", route = "direct", dump, ic_path, t_range = "0.25:0.25:20";
    bool modified = false;

    auto* cmd_profile = app.add_subcommand("profile", "profile geometry report");
    cmd_profile->add_option("--family", family);
    cmd_profile->add_option("--period", period);

    auto* cmd_airy = app.add_subcommand("airy", "Airy kernel and envelope fit");
    cmd_airy->add_option("--period", period);
    cmd_airy->add_option("--n", n);
    cmd_airy->add_option("--k", k);
    cmd_airy->add_option("--nu", nu);
    cmd_airy->add_option("--lambda", lambda);
    cmd_airy->add_option("--alpha", alpha);
    cmd_airy->add_option("--dump", dump, "write the kernel matrix block here");

    auto* cmd_green = app.add_subcommand("green", "Green's function kernels");
    cmd_green->add_flag("--modified", modified, "modified Green's function");
    cmd_green->add_option("--period", period);
    cmd_green->add_option("--n", n);
    cmd_green->add_option("--k", k);
    cmd_green->add_option("--nu", nu);
    cmd_green->add_option("--lambda", lambda);
    cmd_green->add_option("--alpha", alpha);
    cmd_green->add_option("--j", j);
    cmd_green->add_option("--dump", dump);

    auto* cmd_lap = app.add_subcommand("lap", "limiting absorption scan");
    cmd_lap->add_option("--period", period);
    cmd_lap->add_option("--n", n);
    cmd_lap->add_option("--k", k);
    cmd_lap->add_option("--nu", nu);
    cmd_lap->add_option("--gamma", gamma);
    cmd_lap->add_option("--lambda-count", lambda_count);

    auto* cmd_evolve = app.add_subcommand("evolve", "time evolution of one mode");
    cmd_evolve->add_option("--route", route)->check(CLI::IsMember({"direct", "contour", "both"}));
    cmd_evolve->add_option("--period", period);
    cmd_evolve->add_option("--n", n);
    cmd_evolve->add_option("--k", k);
    cmd_evolve->add_option("--nu", nu);
    cmd_evolve->add_option("--t", t_range, "start:step:stop");
    cmd_evolve->add_option("--ic", ic_path, "initial condition CSV (y,re,im)");

    auto* cmd_rates = app.add_subcommand("rates", "evolve and fit decay rates");
    cmd_rates->add_option("--period", period);
    cmd_rates->add_option("--n", n);
    cmd_rates->add_option("--k", k);
    cmd_rates->add_option("--nu", nu);
    cmd_rates->add_option("--t", t_range);
    cmd_rates->add_option("--ic", ic_path);
    cmd_rates->add_option("--gamma", gamma);

    auto* cmd_bench = app.add_subcommand("bench", "run the reference benchmark config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty() && !app.got_subcommand(cmd_bench)) {
            ExperimentConfig cfg = load_config(config_path);
            cfg.out_dir = out_path;
            cfg.seed = seed;
            run_experiment(cfg, threads);
            return 0;
        }

        if (app.got_subcommand(cmd_profile)) {
            ShearProfile p = build_profile({family, period, {}});
            json out = {{"period", p.period()},
                        {"critical_points", p.critical_points()},
                        {"critical_values", p.critical_values()},
                        {"critical_curvatures", p.critical_curvatures()},
                        {"kappa", p.kappa()},
                        {"delta0", p.delta0()},
                        {"sigma_halfwidth", {p.sigma_halfwidth(0), p.sigma_halfwidth(1)}},
                        {"c4_norm", p.c4_norm()}};
            std::cout << out.dump(2) << "\n";
        } else if (app.got_subcommand(cmd_airy)) {
            ShearProfile p = build_profile({family, period, {}});
            Grid grid(n, period);
            SpectralPoint pt(lambda, alpha, nu, k);
            ParamGeometry geo = param_geometry(p, pt);
            Eigen::MatrixXcd K = airy_kernel(p, pt, grid);
            EnvelopeFit fit = fit_envelope(K, p, pt, geo, grid);
            json out = {{"point", point_json(pt)},
                        {"regime", regime_name(geo.regime)},
                        {"delta", geo.delta},
                        {"envelope", {{"C", fit.C}, {"c0", fit.c0}, {"r2", fit.r2}}}};
            if (!dump.empty()) {
                write_matrix_block_file(dump, K);
                out["dump"] = dump;
            }
            std::cout << out.dump(2) << "\n";
        } else if (app.got_subcommand(cmd_green)) {
            Grid grid(n, period);
            if (!modified) {
                StandardGreen g = green_standard(k, period);
                json out = {{"k", k},
                            {"period", period},
                            {"diag", g.G(0, 0)},
                            {"envelope_C", fit_standard_envelope(g, grid)}};
                if (!dump.empty()) {
                    write_matrix_block_file(dump, g.matrix(grid).cast<Complex>());
                    out["dump"] = dump;
                }
                std::cout << out.dump(2) << "\n";
            } else {
                ShearProfile p = build_profile({family, period, {}});
                SpectralPoint pt(lambda, alpha, nu, k);
                ParamGeometry geo = param_geometry(p, pt);
                ModifiedGreen mg = green_modified(p, pt, geo, grid, j, true);
                WeightField w = weights(p, geo, j, grid, k, true);
                GreenEnvelopeFit fit = fit_modified_envelope(mg, p, geo, w);
                json out = {{"point", point_json(pt)},
                            {"residual", mg.residual_max},
                            {"asymmetry", mg.asymmetry},
                            {"re_v_min", mg.re_v_min},
                            {"fits",
                             {{"C_g0", fit.C_g0},
                              {"C_g1", fit.C_g1},
                              {"C_h", fit.C_h},
                              {"C_sum", fit.C_sum}}}};
                if (!dump.empty()) {
                    write_matrix_block_file(dump, mg.G);
                    std::ofstream side(dump + ".json");
                    side << out.dump(2) << "\n";
                    out["dump"] = dump;
                }
                std::cout << out.dump(2) << "\n";
            }
        } else if (app.got_subcommand(cmd_lap)) {
            ShearProfile p = build_profile({family, period, {}});
            Grid grid(n, period);
            json rows = json::array();
            double kappa_min = std::numeric_limits<double>::infinity();
            for (int jj = 0; jj < 2; ++jj) {
                double c = p.critical_values()[jj], hw = p.sigma_halfwidth(jj);
                for (int i = 0; i < lambda_count; ++i) {
                    double lam = c - hw + (2 * hw * (i + 0.5)) / lambda_count;
                    SpectralPoint pt(lam, 0.0, nu, k);
                    ParamGeometry geo = param_geometry(p, pt);
                    WeightedNormSpec spec{0.0, -gamma, gamma, jj};
                    LapRow row = lap_constant(p, pt, geo, grid, spec, jj);
                    kappa_min = std::min(kappa_min, row.kappa_mixed);
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
            json out = {{"kappa_min", kappa_min}, {"rows", rows}};
            std::ofstream f(out_path);
            f << out.dump(2) << "\n";
            std::cout << out.dump(2) << "\n";
        } else if (app.got_subcommand(cmd_evolve) || app.got_subcommand(cmd_rates)) {
            ShearProfile p = build_profile({family, period, {}});
            Grid grid(n, period);
            std::vector<double> t_grid = parse_time_range(t_range);
            ComplexField w0;
            if (!ic_path.empty()) {
                w0 = read_ic(ic_path, grid);
            } else {
                ExperimentConfig defaults;
                w0 = initial_condition(defaults, grid);
            }
            std::vector<std::string> routes;
            if (app.got_subcommand(cmd_rates) || route == "direct" || route == "both")
                routes.push_back("direct");
            if (app.got_subcommand(cmd_evolve) && (route == "contour" || route == "both"))
                routes.push_back("contour");

            std::filesystem::create_directories(out_path);
            for (const auto& r : routes) {
                EvolutionState st;
                if (r == "direct") {
                    st = evolve_direct(p, grid, k, nu, w0, t_grid);
                } else {
                    double a = -0.02 * std::sqrt(nu / k);
                    ContourPlan plan = make_contour_plan(p, k, nu, t_grid.back(), a);
                    st = evolve_contour(p, grid, k, nu, w0, plan, t_grid);
                }
                for (size_t i = 0; i < t_grid.size(); ++i) {
                    std::ostringstream name;
                    name << out_path << "/omega_" << r << "_t" << t_grid[i] << ".bin";
                    std::ofstream bin(name.str(), std::ios::binary);
                    write_field_block(bin, st.omega[i]);
                }
                if (app.got_subcommand(cmd_rates)) {
                    RateSpec rs;
                    rs.gamma = gamma;
                    rs.seed = seed;
                    rs.t_hi = t_grid.back();
                    auto fits = fit_rates(st, grid, p, rs);
                    json out = json::array();
                    for (const auto& f : fits)
                        out.push_back({{"quantity", f.quantity},
                                       {"window", {f.t_lo, f.t_hi}},
                                       {"exponent", f.exponent},
                                       {"rate", f.rate},
                                       {"uncertainty", f.uncertainty},
                                       {"r2", f.r2}});
                    std::ofstream f(out_path + "/rates.json");
                    f << out.dump(2) << "\n";
                    std::cout << out.dump(2) << "\n";
                }
            }
        } else if (app.got_subcommand(cmd_bench)) {
            std::string path = config_path.empty() ? "bench_kolmogorov.cfg" : config_path;
            ExperimentConfig cfg = load_config(path);
            if (!out_path.empty()) cfg.out_dir = out_path;
            RunManifest man = run_experiment(cfg, threads);
            std::cout << man.to_json();
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
