#include "oscar/green.hpp"

#include <algorithm>
#include <cmath>

#include "oscar/cutoff.hpp"

namespace oscar {

namespace {

double wrap_signed(double s, double p) {
    s = std::fmod(s, p);
    if (s < -p / 2) s += p;
    if (s >= p / 2) s -= p;
    return s;
}

std::shared_ptr<const Grid> borrow(const Grid& grid) {
    return {std::shared_ptr<const Grid>(), &grid};
}

}  // namespace

double StandardGreen::G(double y, double z) const {
    double d = std::abs(wrap_signed(y - z, p));
    return std::cosh(k * (p / 2 - d)) / (2 * k * std::sinh(k * p / 2));
}

double StandardGreen::dG_dy(double y, double z) const {
    double s = wrap_signed(y - z, p);
    double sign = s >= 0 ? 1.0 : -1.0;
    return -sign * std::sinh(k * (p / 2 - std::abs(s))) / (2 * std::sinh(k * p / 2));
}

Eigen::MatrixXd StandardGreen::matrix(const Grid& grid) const {
    const int N = grid.size();
    Eigen::MatrixXd M(N, N);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) M(m, n) = G(grid.nodes()[m], grid.nodes()[n]);
    return M;
}

StandardGreen green_standard(int k, double p) {
    if (k < 1) throw Error("green_standard: k must be >= 1");
    return StandardGreen{k, p};
}

double fit_standard_envelope(const StandardGreen& g, const Grid& grid) {
    double C = 0;
    const int N = grid.size();
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
            double y = grid.nodes()[m], z = grid.nodes()[n];
            double d = grid.periodic_distance(y, z);
            double lhs = std::abs(g.G(y, z)) + std::abs(g.dG_dy(y, z)) / g.k;
            C = std::max(C, lhs * g.k * std::exp(g.k * d));
        }
    return C;
}

// ---------------------------------------------------------------------------

ModifiedGreen assemble_modified_green(std::shared_ptr<const Grid> grid, int k,
                                      const ComplexField& V, int j) {
    const int N = grid->size();
    ComplexField c2 = ComplexField::Constant(N, -1.0);
    ComplexField c0 = V.array() + double(k) * k;
    PeriodicOperator op(grid, c2, c0);

    ModifiedGreen mg;
    mg.grid = grid;
    mg.k = k;
    mg.j = j;
    mg.V = V;

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(op.dense());
    mg.G = lu.inverse() / grid->spacing();
    // rcond estimate through the solved columns: a blown-up inverse signals
    // loss of the coercivity the potential is supposed to preserve
    double norm_a = op.dense().cwiseAbs().rowwise().sum().maxCoeff();
    double norm_inv = mg.G.cwiseAbs().rowwise().sum().maxCoeff() * grid->spacing();
    if (norm_a * norm_inv > 1e14) throw NearSingular("modified Green solve ill-conditioned");

    Eigen::MatrixXcd R = op.dense() * mg.G;
    for (int n = 0; n < N; ++n) R(n, n) -= 1.0 / grid->spacing();
    mg.residual_max = R.cwiseAbs().maxCoeff();
    double gmax = mg.G.cwiseAbs().maxCoeff();
    mg.asymmetry = (mg.G - mg.G.transpose()).cwiseAbs().maxCoeff() / gmax;
    mg.re_v_min = V.real().minCoeff();
    return mg;
}

ComplexField critical_layer_potential(const ShearProfile& profile, const SpectralPoint& point,
                                      const ParamGeometry& geometry, const Grid& grid, int j) {
    const int N = grid.size();
    const double p = grid.period();
    const double ys = profile.critical_points()[j];
    ComplexField V(N);
    auto eval = [&](double y) -> Complex {
        double s = wrap_signed(y - ys, p);
        double bump = phi0(s / profile.delta0()) - phi0(s / geometry.delta);
        if (bump == 0.0) return 0.0;
        Complex den(profile.b(y) - point.lambda, -point.alpha);
        return profile.deriv(y, 2) * bump / den;
    };
    for (int m = 0; m < N; ++m) {
        double y = grid.nodes()[m];
        Complex den(profile.b(y) - point.lambda, -point.alpha);
        // half-cell offset when a node lands on a real crossing at alpha = 0
        if (std::abs(den) < 1e-10) y += grid.spacing() / 2;
        V[m] = eval(y);
    }
    return V;
}

ModifiedGreen green_modified(const ShearProfile& profile, const SpectralPoint& point,
                             const ParamGeometry& geometry, const Grid& grid, int j,
                             bool force) {
    if (!force && geometry.delta > grid.period() / 8)
        throw DeltaTooLarge("delta(Lambda) exceeds p/8");
    ComplexField V = critical_layer_potential(profile, point, geometry, grid, j);
    return assemble_modified_green(borrow(grid), point.k, V, j);
}

Eigen::MatrixXcd h_kernel(const ModifiedGreen& mg, const ShearProfile& profile,
                          const ParamGeometry& geometry) {
    const Grid& grid = *mg.grid;
    const int N = grid.size();
    const double ys = profile.critical_points()[mg.j];
    Eigen::MatrixXcd dz = mg.G * grid.diff1().transpose();
    Eigen::MatrixXcd dy = grid.diff1() * mg.G;
    Eigen::MatrixXcd H = dz;
    for (int m = 0; m < N; ++m) {
        double s = wrap_signed(grid.nodes()[m] - ys, grid.period());
        double cut = phi0(s / (10 * geometry.delta));
        if (cut != 0.0) H.row(m) += cut * dy.row(m);
    }
    return H;
}

GreenEnvelopeFit fit_modified_envelope(const ModifiedGreen& mg, const ShearProfile& profile,
                                       const ParamGeometry& geometry, const WeightField& w) {
    const Grid& grid = *mg.grid;
    const int N = grid.size();
    const int k = mg.k;
    Eigen::MatrixXcd dyG = grid.diff1() * mg.G;
    Eigen::MatrixXcd H = h_kernel(mg, profile, geometry);
    Eigen::MatrixXcd sumG = dyG + mg.G * grid.diff1().transpose();

    auto env_core = [&](int m, int n) {
        double d = grid.periodic_distance(grid.nodes()[m], grid.nodes()[n]);
        double ry = w.rho_j[m], rz = w.rho_j[n];
        return std::min({std::exp(-k * d), (ry * ry) / (rz * rz), rz / ry});
    };
    GreenEnvelopeFit fit{0, 0, 0, 0};
    const double ys = profile.critical_points()[mg.j];
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
            double e = env_core(m, n);
            fit.C_g0 = std::max(fit.C_g0, std::abs(mg.G(m, n)) / (w.rho_jk[n] * e));
            fit.C_g1 =
                std::max(fit.C_g1, w.rho_jk[m] * std::abs(dyG(m, n)) / (w.rho_jk[n] * e));
            if (profile.periodic_distance(grid.nodes()[n], ys) <= 4 * geometry.delta)
                fit.C_h = std::max(fit.C_h, std::abs(H(m, n)) / e);
            double d = grid.periodic_distance(grid.nodes()[m], grid.nodes()[n]);
            double es = std::min({std::exp(-0.5 * k * d), w.rho_jk[m] / w.rho_j[n],
                                  w.rho_jk[n] / w.rho_j[m]});
            fit.C_sum = std::max(fit.C_sum, std::abs(sumG(m, n)) / es);
        }
    return fit;
}

IntegralBoundFit fit_integral_bounds(const StandardGreen& g, const Grid& grid) {
    const int N = grid.size();
    const double h = grid.spacing();
    IntegralBoundFit fit{0, 0, 0, 0};
    for (int m = 0; m < N; ++m) {
        double y = grid.nodes()[m];
        double g0 = 0, g1 = 0, f0 = 0, f1 = 0;
        for (int n = 0; n < N; ++n) {
            double z = grid.nodes()[n];
            double Gv = g.G(y, z), dG = g.dG_dy(y, z), Fv = g.F(y, z);
            g0 += Gv * Gv * h;
            g1 += dG * dG * h;
            f0 += Fv * Fv * h;
            // dF/dy = -k^2 dG/dy away from the diagonal
            double dF = -double(g.k) * g.k * dG;
            f1 += dF * dF * h;
        }
        fit.C_g0 = std::max(fit.C_g0, std::pow(g.k, 1.5) * std::sqrt(g0));
        fit.C_g1 = std::max(fit.C_g1, std::pow(g.k, 0.5) * std::sqrt(g1));
        fit.C_f0 = std::max(fit.C_f0, std::pow(g.k, -0.5) * std::sqrt(f0));
        fit.C_f1 = std::max(fit.C_f1, std::pow(g.k, -1.5) * std::sqrt(f1));
    }
    return fit;
}

}  // namespace oscar
