#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "oscar/grid.hpp"

using namespace oscar;

namespace {

std::shared_ptr<const Grid> make_grid(int n, double p) {
    return std::make_shared<const Grid>(n, p);
}

ComplexField plane_wave(const Grid& g, int m) {
    const double ell = 2.0 * M_PI * m / g.period();
    ComplexField v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = std::exp(Complex(0, ell * g.nodes()[i]));
    return v;
}

}  // namespace

TEST_CASE("nodes and spacing") {
    Grid g(64, 8.0);
    CHECK(g.size() == 64);
    CHECK(g.spacing() == doctest::Approx(0.125));
    CHECK(g.nodes()[0] == doctest::Approx(0.0));
    CHECK(g.nodes()[63] == doctest::Approx(8.0 - 0.125));
    // FFT bin order
    CHECK(g.wavenumbers()[1] == doctest::Approx(2.0 * M_PI / 8.0));
    CHECK(g.wavenumbers()[63] == doctest::Approx(-2.0 * M_PI / 8.0));
}

TEST_CASE("periodic distance and nearest node") {
    Grid g(32, 8.0);
    CHECK(g.periodic_distance(0.5, 7.5) == doctest::Approx(1.0));
    CHECK(g.periodic_distance(1.0, 3.0) == doctest::Approx(2.0));
    CHECK(g.nearest_node(7.99) == 0);  // wraps
    ComplexField d = g.impulse(2.0);
    int i2 = g.nearest_node(2.0);
    CHECK(std::abs(d[i2] - 1.0 / g.spacing()) < 1e-14);
    CHECK(std::abs(d.sum() * g.spacing() - 1.0) < 1e-14);
}

TEST_CASE("spectral round trip and derivative") {
    Grid g(64, 8.0);
    ComplexField v = plane_wave(g, 3);
    ComplexField back = g.from_spectral(g.to_spectral(v));
    CHECK((back - v).cwiseAbs().maxCoeff() < 1e-12);

    const double ell = 2.0 * M_PI * 3 / 8.0;
    ComplexField d1 = g.derivative(v, 1);
    ComplexField d2 = g.derivative(v, 2);
    CHECK((d1 - Complex(0, ell) * v).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((d2 + ell * ell * v).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("helmholtz inverse factor") {
    // (d^2 - k^2) psi = omega; for omega = e^{i ell y}, psi = -omega/(ell^2+k^2).
    // ell = 2 pi/8, k = 1: factor = -0.61848645815883626.
    Grid g(64, 8.0);
    ComplexField v = plane_wave(g, 1);
    ComplexField psi = g.invert_helmholtz(v, 1);
    CHECK((psi - (-0.61848645815883626) * v).cwiseAbs().maxCoeff() < 1e-12);

    // dense matrix agrees with the diagonal solve
    ComplexField psi_m = g.helmholtz_inverse(1) * v;
    CHECK((psi_m - psi).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero mode rejected") {
    Grid g(32, 8.0);
    ComplexField v = ComplexField::Ones(32);
    CHECK_THROWS_AS(g.invert_helmholtz(v, 0), ZeroMode);
}

TEST_CASE("circulant matrices match spectral application") {
    Grid g(48, 8.0);
    ComplexField v(48);
    for (int i = 0; i < 48; ++i) {
        double y = g.nodes()[i];
        v[i] = std::sin(2 * M_PI * y / 8.0) + Complex(0, 1) * std::cos(4 * M_PI * y / 8.0);
    }
    CHECK((g.diff1() * v - g.derivative(v, 1)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((g.diff2() * v - g.derivative(v, 2)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("periodic operator: dense vs stencil") {
    auto g = make_grid(96, 8.0);
    ComplexField c2 = ComplexField::Constant(96, Complex(1e-3, 0));
    ComplexField c0(96);
    for (int i = 0; i < 96; ++i)
        c0[i] = Complex(-0.1, 0.5 - std::sin(2 * M_PI * g->nodes()[i] / 8.0));

    PeriodicOperator dense(g, c2, c0, PeriodicOperator::Assembly::SpectralDense);
    PeriodicOperator sten(g, c2, c0, PeriodicOperator::Assembly::Stencil6);

    ComplexField v(96);
    for (int i = 0; i < 96; ++i) v[i] = std::exp(Complex(0, 2 * M_PI * g->nodes()[i] / 8.0));

    ComplexField a = dense.apply(v), b = sten.apply(v);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);

    ComplexField rhs = a;
    ComplexField x1 = dense.solve(rhs);
    CHECK((x1 - v).cwiseAbs().maxCoeff() < 1e-8);
    ComplexField x2 = sten.solve(sten.apply(v));
    CHECK((x2 - v).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("near-singular operator throws") {
    auto g = make_grid(32, 8.0);
    // c2 = 0, c0 = 0: the zero operator
    PeriodicOperator op(g, ComplexField::Zero(32), ComplexField::Zero(32));
    CHECK_THROWS_AS(op.solve(ComplexField::Ones(32)), NearSingular);
}

TEST_CASE("recommended size") {
    int n = Grid::recommended_size(8.0, 0.5, 32);
    CHECK(n >= 8.0 / 0.5 * 32);
    CHECK(n % 2 == 0);
}
