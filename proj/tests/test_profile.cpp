#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oscar/profile.hpp"

using namespace oscar;

TEST_CASE("kolmogorov profile, p = 8") {
    ShearProfile b = build_profile({.family = "kolmogorov", .period = 8.0});
    CHECK(b.period() == doctest::Approx(8.0));
    CHECK(b.b(2.0) == doctest::Approx(1.0));
    CHECK(b.b(6.0) == doctest::Approx(-1.0));
    CHECK(b.b_max() == doctest::Approx(1.0));

    CHECK(b.critical_points()[0] == doctest::Approx(2.0));
    CHECK(b.critical_points()[1] == doctest::Approx(6.0));
    CHECK(b.critical_values()[0] == doctest::Approx(1.0));
    CHECK(b.critical_values()[1] == doctest::Approx(-1.0));
    // b''(2) = -(2 pi / 8)^2
    CHECK(b.critical_curvatures()[0] == doctest::Approx(-0.61685027506808491).epsilon(1e-12));
    CHECK(b.critical_curvatures()[1] == doctest::Approx(0.61685027506808491).epsilon(1e-12));

    CHECK(b.deriv(0.0, 1) == doctest::Approx(2 * M_PI / 8.0));
    CHECK(b.deriv(2.0, 1) == doctest::Approx(0.0));
    CHECK(b.deriv(1.0, 3) == doctest::Approx(-std::pow(2 * M_PI / 8.0, 3) * std::cos(M_PI / 4)));
}

TEST_CASE("period constraint") {
    CHECK_THROWS_AS(build_profile({.family = "kolmogorov", .period = 6.0}), PeriodTooSmall);
    CHECK_THROWS_AS(build_profile({.family = "kolmogorov", .period = 2 * M_PI}), PeriodTooSmall);
    CHECK_NOTHROW(build_profile({.family = "kolmogorov", .period = 6.30}));
}

TEST_CASE("table profile matches the analytic family") {
    int n = 256;
    std::vector<double> samples(n);
    for (int i = 0; i < n; ++i) samples[i] = std::sin(2 * M_PI * (8.0 * i / n) / 8.0);
    ShearProfile t = build_profile({.family = "table", .period = 8.0, .samples = samples});
    ShearProfile a = build_profile({.family = "kolmogorov", .period = 8.0});
    for (double y : {0.3, 1.7, 4.9, 7.2}) {
        CHECK(t.b(y) == doctest::Approx(a.b(y)).epsilon(1e-10));
        CHECK(t.deriv(y, 2) == doctest::Approx(a.deriv(y, 2)).epsilon(1e-8));
    }
    CHECK(t.critical_points()[0] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("nondegeneracy invariants") {
    ShearProfile b = build_profile({.family = "kolmogorov", .period = 8.0});
    CHECK(b.kappa() > 0);
    CHECK(b.delta0() > 0);
    // kappa <= |b''| at the critical points, and |b'| grows linearly away from
    // them at a rate commensurate with kappa
    for (int j = 0; j < 2; ++j) {
        double ys = b.critical_points()[j];
        CHECK(std::abs(b.deriv(ys, 2)) >= b.kappa());
        for (double d : {0.1, 0.3, 0.5}) {
            CHECK(std::abs(b.deriv(ys + d, 1)) >= 0.6 * b.kappa() * d);
        }
    }
    // sigma halfwidth formula
    for (int j = 0; j < 2; ++j) {
        double hw = std::abs(b.critical_curvatures()[j]) * b.delta0() * b.delta0() / 16.0;
        CHECK(b.sigma_halfwidth(j) == doctest::Approx(hw));
        CHECK(b.in_sigma(b.critical_values()[j], j));
        CHECK(b.in_sigma(b.critical_values()[j] + 0.99 * hw, j));
        CHECK(!b.in_sigma(b.critical_values()[j] + 1.01 * hw, j));
    }
    CHECK(b.nearest_critical(0.9) == 0);
    CHECK(b.nearest_critical(-0.4) == 1);
}

TEST_CASE("parameter geometry at a generic point") {
    ShearProfile b = build_profile({.family = "kolmogorov", .period = 8.0});
    SpectralPoint pt(0.9, 0.0, 1e-4, 1);
    CHECK(pt.epsilon() == doctest::Approx(1e-4));

    ParamGeometry geo = param_geometry(b, pt);
    // delta1 = 8 sqrt(0.1 / 0.61685027506808491) = 3.2210731...
    CHECK(geo.delta1 == doctest::Approx(3.2210731).epsilon(1e-6));
    CHECK(geo.delta2 == doctest::Approx(geo.delta1 / 64.0));
    // delta = sqrt(alpha) + C (nu/k)^{1/4} + delta1 = 0 + 10*0.1 + delta1
    CHECK(geo.delta == doctest::Approx(1.0 + geo.delta1));
    CHECK(geo.min_crit_dist == doctest::Approx(0.1));
    CHECK(!geo.sigma_member[0]);
    CHECK(!geo.sigma_member[1]);
    CHECK(geo.regime == Regime::Nondegenerate);
}

TEST_CASE("regime classification moves with the parameters") {
    ShearProfile b = build_profile({.family = "kolmogorov", .period = 8.0});
    // lambda pinned at the critical value with tiny nu: degenerate territory
    SpectralPoint near(1.0, 0.0, 1e-8, 1);
    ParamGeometry g_near = param_geometry(b, near);
    CHECK(g_near.sigma_member[0]);
    CHECK(g_near.regime != Regime::Nondegenerate);
    CHECK(g_near.beta >= 0);
    CHECK(g_near.beta <= 0.25 + 1e-12);

    SpectralPoint far(0.0, 0.0, 1e-8, 1);
    CHECK(param_geometry(b, far).regime == Regime::Nondegenerate);
}

TEST_CASE("weight fields") {
    ShearProfile b = build_profile({.family = "kolmogorov", .period = 8.0});
    Grid grid(128, 8.0);

    SpectralPoint pt(0.9, 0.0, 1e-4, 1);
    ParamGeometry geo = param_geometry(b, pt);
    // delta(Lambda) = 4.22 > p/8 = 1 here
    CHECK_THROWS_AS(weights(b, geo, 0, grid, 1), DeltaTooLarge);
    WeightField w = weights(b, geo, 0, grid, 1, /*override_delta_check=*/true);
    int i = grid.nearest_node(2.0);
    CHECK(w.rho_j[i] == doctest::Approx(geo.delta));
    CHECK(w.rho_jk[i] == doctest::Approx(std::min(geo.delta, 1.0)));
    CHECK(w.d_jk == doctest::Approx(std::min(geo.delta, 1.0)));
    CHECK(w.s_lo == doctest::Approx(2.0 - geo.delta));
    CHECK(w.s_hi == doctest::Approx(2.0 + geo.delta));

    // small-delta point passes the check
    SpectralPoint pt2(0.999, 0.0, 1e-8, 1);
    ParamGeometry geo2 = param_geometry(b, pt2, {.c_dagger = 2.0});
    WeightField w2 = weights(b, geo2, 0, grid, 1);
    CHECK(w2.rho_j.minCoeff() == doctest::Approx(geo2.delta).epsilon(1e-2));
    int far = grid.nearest_node(6.0);
    CHECK(w2.rho_j[far] == doctest::Approx(4.0 + geo2.delta).epsilon(1e-2));
    CHECK(w2.rho_jk[far] == doctest::Approx(1.0));
}

TEST_CASE("alpha admissibility") {
    CHECK_NOTHROW(SpectralPoint(0.5, 0.0, 1e-4, 1));
    CHECK_NOTHROW(SpectralPoint(0.5, 0.1, 1e-4, 1));
    // alpha may dip slightly negative, down to -sigma0 sqrt(eps); far below throws
    CHECK_THROWS_AS(SpectralPoint(0.5, -1.0, 1e-4, 1), AlphaOutOfRange);
}
