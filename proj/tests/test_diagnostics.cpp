#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "oscar/diagnostics.hpp"
#include "oscar/experiment.hpp"
#include "oscar/field_io.hpp"

using namespace oscar;

TEST_CASE("power-law fit on synthetic data") {
    std::vector<double> t, v;
    for (double x = 1.0; x <= 60.0; x += 0.5) {
        t.push_back(x);
        v.push_back(3.7 / (x * x));
    }
    RateFit f = fit_power_law(t, v, 5.0, 50.0);
    CHECK(f.exponent == doctest::Approx(-2.0).epsilon(0.005));
    CHECK(f.uncertainty < 0.01);
    CHECK(f.r2 > 0.999);
    CHECK(!f.exponential);
}

TEST_CASE("exponential fit on synthetic data") {
    std::vector<double> t, v;
    for (double x = 1.0; x <= 60.0; x += 0.5) {
        t.push_back(x);
        v.push_back(2.0 * std::exp(-0.1 * x));
    }
    RateFit f = fit_exponential(t, v, 5.0, 50.0);
    CHECK(f.rate == doctest::Approx(0.1).epsilon(0.02));
    CHECK(f.uncertainty < 0.002);
    CHECK(f.exponential);
}

TEST_CASE("window too short") {
    std::vector<double> t = {1.0, 2.0, 3.0}, v = {1.0, 0.5, 0.3};
    CHECK_THROWS_AS(fit_power_law(t, v, 10.0, 50.0), WindowTooShort);
}

TEST_CASE("noisy fit keeps a wider band") {
    std::vector<double> t, v;
    std::mt19937 rng(3);
    std::normal_distribution<double> noise(0.0, 0.2);
    for (double x = 1.0; x <= 60.0; x += 0.5) {
        t.push_back(x);
        v.push_back(3.7 / (x * x) * std::exp(noise(rng)));
    }
    RateFit f = fit_power_law(t, v, 5.0, 50.0);
    CHECK(f.exponent == doctest::Approx(-2.0).epsilon(0.15));
    CHECK(f.uncertainty > 0.005);
}

namespace {

EvolutionState synthetic_run(const Grid& grid, const std::function<double(double)>& level) {
    EvolutionState st;
    st.k = 1;
    for (double t = 1.0; t <= 40.0; t += 1.0) {
        st.t.push_back(t);
        st.omega.push_back(ComplexField::Constant(grid.size(), Complex(level(t), 0)));
        st.psi.push_back(ComplexField::Zero(grid.size()));
    }
    return st;
}

}  // namespace

TEST_CASE("depletion plateaus and slope") {
    Grid grid(64, 8.0);
    ShearProfile b = build_profile({.family = "kolmogorov", .period = 8.0});
    // plateau levels proportional to nu^{0.469}
    std::vector<double> nus = {1e-3, 1e-4};
    std::vector<EvolutionState> runs;
    for (double nu : nus)
        runs.push_back(synthetic_run(grid, [nu](double) { return std::pow(nu, 0.469); }));
    DepletionProfile d = depletion_profile(runs, nus, grid, b, 0, 15.0 / 8.0, 1.0);
    CHECK(d.slope == doctest::Approx(0.469).epsilon(1e-6));
    CHECK(d.plateau.size() == 2);

    // a drifting signal has no plateau
    std::vector<EvolutionState> bad = {synthetic_run(grid, [](double t) { return std::exp(0.2 * t); }),
                                       synthetic_run(grid, [](double t) { return std::exp(0.2 * t); })};
    CHECK_THROWS_AS(depletion_profile(bad, nus, grid, b, 0, 15.0 / 8.0, 1.0), NoPlateaus);
}

TEST_CASE("config parsing") {
    const char* good = R"({
        "profile": {"family": "kolmogorov", "period": 8.0},
        "grid": {"n": 128},
        "k": [1, 2], "nu": [1e-3],
        "routes": ["direct"],
        "t": {"start": 0.5, "step": 0.5, "stop": 4.0},
        "ic": {"type": "fourier", "modes": [[1, 1.0, 0.0]]},
        "rates": {"enabled": false},
        "out_dir": "/tmp/oscar_cfg_test"
    })";
    ExperimentConfig cfg = parse_config(good);
    CHECK(cfg.profile.period == 8.0);
    CHECK(cfg.grid_n == 128);
    CHECK(cfg.ks.size() == 2);
    CHECK(!cfg.fit);

    CHECK_THROWS_AS(parse_config("{\"profile\": {}}"), ConfigInvalid);
    try {
        parse_config("{\"profile\": {\"family\": \"kolmogorov\"}}");
        CHECK(false);
    } catch (const ConfigInvalid& e) {
        CHECK(std::string(e.what()).find("profile.period") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("not json"), ConfigInvalid);
    CHECK_THROWS_AS(parse_config(R"({"profile": {"period": 8.0}, "routes": ["x"]})"),
                    ConfigInvalid);
}

TEST_CASE("initial conditions") {
    Grid grid(64, 8.0);
    ExperimentConfig cfg;
    cfg.ic_modes = {{2, 1.0, 0.5}};
    ComplexField w = initial_condition(cfg, grid);
    ComplexField expect(64);
    for (int i = 0; i < 64; ++i)
        expect[i] = Complex(1.0, 0.5) * std::exp(Complex(0, 2 * M_PI * 2 * grid.nodes()[i] / 8.0));
    CHECK((w - expect).cwiseAbs().maxCoeff() < 1e-12);

    cfg.ic_type = "bump";
    cfg.ic_center = 3.0;
    cfg.ic_width = 0.5;
    ComplexField bump = initial_condition(cfg, grid);
    CHECK(std::abs(bump[grid.nearest_node(3.0)]) > std::abs(bump[grid.nearest_node(7.0)]));
}

TEST_CASE("field io round trips") {
    Grid grid(32, 8.0);
    ComplexField v(32);
    for (int i = 0; i < 32; ++i) v[i] = Complex(std::sin(i * 0.3), std::cos(i * 0.7));

    std::string path = "/tmp/oscar_field_test.csv";
    write_field_csv(path, grid, v);
    ComplexField back = read_field_csv(path);
    CHECK((back - v).cwiseAbs().maxCoeff() < 1e-15);

    std::string bpath = "/tmp/oscar_block_test.bin";
    {
        std::ofstream out(bpath, std::ios::binary);
        write_field_block(out, v);
    }
    {
        std::ifstream in(bpath, std::ios::binary);
        ComplexField b2 = read_field_block(in);
        CHECK((b2 - v).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(file_checksum(path) == file_checksum(path));
    std::remove(path.c_str());
    std::remove(bpath.c_str());
}

TEST_CASE("manifest JSON") {
    RunManifest m;
    m.config_snapshot = "{}";
    m.profile_hash = "abc";
    m.grid_n = 64;
    m.grid_period = 8.0;
    m.artifacts.push_back({"a.csv", 42});
    std::string js = m.to_json();
    CHECK(js.find("\"grid\"") != std::string::npos);
    CHECK(js.find("\"n\": 64") != std::string::npos);
    CHECK(js.find("oscar 0.1.0") != std::string::npos);
    CHECK(js.find("a.csv") != std::string::npos);
}

TEST_CASE("small end-to-end experiment") {
    ExperimentConfig cfg = parse_config(R"({
        "profile": {"family": "kolmogorov", "period": 8.0},
        "grid": {"n": 64},
        "k": [1], "nu": [1e-3],
        "routes": ["direct"],
        "t": {"start": 0.5, "step": 0.5, "stop": 2.0},
        "rates": {"enabled": false},
        "out_dir": "/tmp/oscar_e2e_test"
    })");
    RunManifest m = run_experiment(cfg, 2);
    CHECK(m.grid_n == 64);
    CHECK(!m.artifacts.empty());
    std::ifstream mf("/tmp/oscar_e2e_test/manifest.json");
    CHECK(mf.good());
}
