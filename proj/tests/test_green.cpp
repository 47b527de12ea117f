#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "oscar/green.hpp"

using namespace oscar;

namespace {

std::shared_ptr<const Grid> borrow(const Grid& g) {
    return std::shared_ptr<const Grid>(std::shared_ptr<const Grid>(), &g);
}

ShearProfile kolmogorov() { return build_profile({.family = "kolmogorov", .period = 8.0}); }

}  // namespace

TEST_CASE("standard Green closed form") {
    StandardGreen g = green_standard(1, 8.0);
    // G(y,y) = cosh(4)/(2 sinh(4)) = coth(4)/2
    CHECK(g.G(1.0, 1.0) == doctest::Approx(0.50033557520084124).epsilon(1e-14));
    CHECK(g.G(0.0, 0.0) == doctest::Approx(g.G(5.3, 5.3)));
    // symmetry is exact by the distance formula
    CHECK(g.G(1.0, 3.0) == g.G(3.0, 1.0));
    // F is -k^2 times the smooth Green's function; delta coefficient tracked
    CHECK(g.F(1.0, 3.0) == doctest::Approx(-g.G(1.0, 3.0)));
    CHECK(StandardGreen::delta_coefficient == doctest::Approx(1.0));
    CHECK_THROWS_AS(green_standard(0, 8.0), Error);
}

TEST_CASE("standard Green integrates to 1/k^2") {
    // (k^2 - d^2) G = delta  =>  integral of G over z is 1/k^2
    Grid grid(512, 8.0);
    for (int k : {1, 2, 4}) {
        StandardGreen g = green_standard(k, 8.0);
        double s = 0;
        for (int i = 0; i < grid.size(); ++i) s += g.G(0.7, grid.nodes()[i]);
        s *= grid.spacing();
        CHECK(s == doctest::Approx(1.0 / (k * k)).epsilon(1e-6));
    }
}

TEST_CASE("standard Green solves the ODE on the grid") {
    Grid grid(512, 8.0);
    StandardGreen g = green_standard(2, 8.0);
    Eigen::MatrixXd G = g.matrix(grid);
    // apply (k^2 - d^2) to a smeared field G*f and recover f
    ComplexField f(512);
    for (int i = 0; i < 512; ++i) f[i] = std::cos(2 * M_PI * grid.nodes()[i] / 8.0);
    // trapezoid across the kernel kink is second order in h
    ComplexField u = (G * f.real()).cast<Complex>() * grid.spacing();
    double ell = 2 * M_PI / 8.0;
    ComplexField exact = f / (4.0 + ell * ell);
    CHECK((u - exact).cwiseAbs().maxCoeff() < 1e-4);
    ComplexField res = 4.0 * u - grid.derivative(u, 2) - f;
    CHECK(res.cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("standard envelope constant") {
    Grid grid(256, 8.0);
    for (int k : {1, 2, 4}) {
        StandardGreen g = green_standard(k, 8.0);
        double c = fit_standard_envelope(g, grid);
        CHECK(c > 0);
        CHECK(c < 10.0);
    }
}

TEST_CASE("integral bound constants") {
    Grid grid(512, 8.0);
    IntegralBoundFit f1 = fit_integral_bounds(green_standard(1, 8.0), grid);
    IntegralBoundFit f4 = fit_integral_bounds(green_standard(4, 8.0), grid);
    for (double c : {f1.C_g0, f1.C_g1, f1.C_f0, f1.C_f1, f4.C_g0, f4.C_g1, f4.C_f0, f4.C_f1}) {
        CHECK(c > 0);
        CHECK(std::isfinite(c));
    }
    // uniformity in k is the point of the normalization
    CHECK(f4.C_g0 < 10 * f1.C_g0);
    CHECK(f1.C_g0 < 10 * f4.C_g0);
}

TEST_CASE("modified Green with V = 0 reduces to the standard kernel") {
    Grid grid(256, 8.0);
    ModifiedGreen mg = assemble_modified_green(borrow(grid), 1, ComplexField::Zero(256));
    // exact discrete identity: GG = -(d^2 - k^2)^{-1} / h
    Eigen::MatrixXcd Gd = -grid.helmholtz_inverse(1) / grid.spacing();
    CHECK((mg.G - Gd).cwiseAbs().maxCoeff() < 1e-8);
    // closed form agrees away from the diagonal up to interpolation error
    Eigen::MatrixXd G = green_standard(1, 8.0).matrix(grid);
    double worst = 0;
    for (int i = 0; i < 256; ++i)
        for (int j = 0; j < 256; ++j)
            if (std::abs(i - j) > 8 && std::abs(i - j) < 248)
                worst = std::max(worst, std::abs(mg.G(i, j) - G(i, j)));
    CHECK(worst < 1e-3);
    CHECK(mg.residual_max < 1e-8);
    CHECK(mg.asymmetry < 1e-7);
}

TEST_CASE("modified Green invariants on the shear profile") {
    Grid grid(512, 8.0);
    ShearProfile b = kolmogorov();
    SpectralPoint pt(1.0 - 1e-5, 0.0, 1e-6, 1);
    ParamGeometry geo = param_geometry(b, pt, {.c_dagger = 2.0});
    REQUIRE(geo.delta <= 1.0);

    ComplexField V = critical_layer_potential(b, pt, geo, grid, 0);
    CHECK(V.real().minCoeff() >= -1e-12);

    ModifiedGreen mg = green_modified(b, pt, geo, grid, 0);
    CHECK(mg.residual_max < 1e-8);
    CHECK(mg.asymmetry < 1e-7);
    CHECK(mg.re_v_min >= -1e-12);
}

TEST_CASE("delta check on the pipeline") {
    Grid grid(128, 8.0);
    ShearProfile b = kolmogorov();
    SpectralPoint pt(0.5, 0.0, 1e-4, 1);
    ParamGeometry geo = param_geometry(b, pt);  // delta >> p/8
    CHECK_THROWS_AS(green_modified(b, pt, geo, grid, 0), DeltaTooLarge);
    ModifiedGreen mg = green_modified(b, pt, geo, grid, 0, /*force=*/true);
    CHECK(mg.residual_max < 1e-8);
}

TEST_CASE("H kernel matches d_z G away from the cutoff") {
    Grid grid(256, 8.0);
    ShearProfile b = kolmogorov();
    SpectralPoint pt(1.0 - 1e-5, 0.0, 1e-6, 1);
    ParamGeometry geo = param_geometry(b, pt, {.c_dagger = 2.0});
    ModifiedGreen mg = green_modified(b, pt, geo, grid, 0);
    Eigen::MatrixXcd H = h_kernel(mg, b, geo);
    Eigen::MatrixXcd dzG = mg.G * grid.diff1().transpose();
    // where phi0((y - y*)/(10 delta)) = 0, H = d_z G exactly
    double worst = 0;
    int checked = 0;
    for (int i = 0; i < 256; ++i) {
        if (grid.periodic_distance(grid.nodes()[i], 2.0) <= 20 * geo.delta) continue;
        ++checked;
        worst = std::max(worst, (H.row(i) - dzG.row(i)).cwiseAbs().maxCoeff());
    }
    REQUIRE(checked > 0);
    CHECK(worst < 1e-10);
}

TEST_CASE("modified envelope constants are finite") {
    Grid grid(256, 8.0);
    ShearProfile b = kolmogorov();
    SpectralPoint pt(1.0 - 1e-5, 0.0, 1e-6, 1);
    ParamGeometry geo = param_geometry(b, pt, {.c_dagger = 2.0});
    ModifiedGreen mg = green_modified(b, pt, geo, grid, 0);
    WeightField w = weights(b, geo, 0, grid, 1);
    GreenEnvelopeFit fit = fit_modified_envelope(mg, b, geo, w);
    for (double c : {fit.C_g0, fit.C_g1, fit.C_h, fit.C_sum}) {
        CHECK(c > 0);
        CHECK(std::isfinite(c));
    }
}
