#include "oscar/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <random>

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

void check_conditioning(const Eigen::MatrixXcd& A, const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu,
                        const char* what) {
    const int N = A.rows();
    double na = A.cwiseAbs().rowwise().sum().maxCoeff();
    ComplexField v = ComplexField::Random(N).normalized();
    for (int it = 0; it < 3; ++it) v = lu.solve(v).normalized();
    double ninv = lu.solve(v).norm();
    if (na * ninv > 1e14) throw NearSingular(what);
}

}  // namespace

Eigen::MatrixXcd assemble_Lk(const ShearProfile& profile, const Grid& grid, int k,
                             std::optional<double> nu) {
    const int N = grid.size();
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(N, N);
    if (nu) L = (*nu / k) * grid.diff2();
    const Eigen::MatrixXcd& Hinv = grid.helmholtz_inverse(k);
    for (int n = 0; n < N; ++n) {
        double y = grid.nodes()[n];
        L(n, n) -= Complex(0, profile.b(y));
        L.row(n) += Complex(0, profile.deriv(y, 2)) * Hinv.row(n);
    }
    return L;
}

double hk_norm(const Grid& grid, const ComplexField& g, int k, int m) {
    double total = 0;
    ComplexField d = g;
    for (int j = 0; j <= m; ++j) {
        if (j > 0) d = grid.derivative(d, 1);
        total += std::pow(double(k), 2 * (m - j)) * d.squaredNorm() * grid.spacing();
    }
    return std::sqrt(total);
}

SpectralDensity spectral_density(const ShearProfile& profile, const SpectralPoint& point,
                                 const Grid& grid, const ComplexField& omega0k) {
    const int N = grid.size();
    const int k = point.k;
    Eigen::MatrixXcd M = assemble_Lk(profile, grid, k, point.nu);
    M.diagonal().array() += Complex(-point.alpha, point.lambda);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    check_conditioning(M, lu, "resolvent solve at an eigenvalue of L_k");

    SpectralDensity d;
    d.omega = lu.solve(omega0k);
    d.psi = grid.helmholtz_inverse(k) * d.omega;

    // psi* subtracts the critical-layer profile of the datum
    ComplexField corr = ComplexField::Zero(N);
    RealField cut_sum = RealField::Zero(N);
    for (int j = 0; j < 2; ++j) {
        double ys = profile.critical_points()[j];
        for (int m = 0; m < N; ++m) {
            double s = wrap_signed(grid.nodes()[m] - ys, grid.period());
            double c = phi0(s / profile.delta0());
            if (c == 0.0) continue;
            cut_sum[m] += c;
            corr[m] += c * omega0k[m] / Complex(0, profile.deriv(grid.nodes()[m], 2));
        }
    }
    d.psi_star = d.psi - corr;
    d.omega_star = grid.derivative(d.psi_star, 2) - double(k) * k * d.psi_star;

    ComplexField dk_corr = grid.derivative(corr, 2) - double(k) * k * corr;
    d.f0k = omega0k - (cut_sum.array() * omega0k.array()).matrix() -
            apply_A(profile, point, grid, dk_corr);
    d.M_k = hk_norm(grid, omega0k, k, 3);

    ComplexField res = apply_A(profile, point, grid, d.omega) - omega0k;
    for (int m = 0; m < N; ++m)
        res[m] += Complex(0, profile.deriv(grid.nodes()[m], 2)) * d.psi[m];
    d.residual = res.cwiseAbs().maxCoeff();
    return d;
}

// ---------------------------------------------------------------------------

TOperator assemble_T(const ShearProfile& profile, const SpectralPoint& point,
                     const ParamGeometry& geometry, const Grid& grid,
                     std::optional<int> force_degenerate_j) {
    const int N = grid.size();
    const int k = point.k;
    TOperator out;

    bool member = geometry.sigma_member[0] || geometry.sigma_member[1];
    out.degenerate = force_degenerate_j.has_value() ||
                     (member && point.alpha < profile.delta0());
    if (out.degenerate)
        out.j = force_degenerate_j ? *force_degenerate_j
                                   : (geometry.sigma_member[0] ? 0 : 1);

    AirySolver airy(borrow(grid), profile, point);
    Eigen::MatrixXcd Ainv = airy.inverse();

    RealField bpp(N);
    for (int m = 0; m < N; ++m) bpp[m] = profile.deriv(grid.nodes()[m], 2);

    if (!out.degenerate) {
        out.T = grid.helmholtz_inverse(k) * Ainv *
                (Complex(0, 1) * bpp.array()).matrix().asDiagonal();
        return out;
    }

    const double p = grid.period();
    const double ys = profile.critical_points()[out.j];
    const double dl = geometry.delta;
    RealField phi_d0(N), phi_dL(N), phi_d3(N), eta(N);
    ComplexField invden(N), V(N);
    for (int m = 0; m < N; ++m) {
        double y = grid.nodes()[m];
        Complex den(profile.b(y) - point.lambda, -point.alpha);
        if (std::abs(den) < 1e-10) {
            // half-cell regularization on a node that sits on a crossing
            y += grid.spacing() / 2;
            den = Complex(profile.b(y) - point.lambda, -point.alpha);
        }
        double s = wrap_signed(y - ys, p);
        phi_d0[m] = phi0(s / profile.delta0());
        phi_dL[m] = phi0(s / dl);
        phi_d3[m] = phi0(3 * s / dl);
        eta[m] = phi_d0[m] - phi_dL[m];
        invden[m] = 1.0 / den;
        V[m] = eta[m] * profile.deriv(y, 2) * invden[m];
    }

    Eigen::MatrixXcd Mg = double(k) * k * Eigen::MatrixXcd::Identity(N, N) - grid.diff2();
    Mg += Eigen::MatrixXcd(V.asDiagonal());
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Mg);
    check_conditioning(Mg, lu, "modified Green operator singular");
    Eigen::MatrixXcd Minv = lu.inverse();

    Eigen::MatrixXcd Ainv_eta = Ainv * (eta.array() * bpp.array()).matrix().asDiagonal();
    out.T_I1 = Minv * Ainv *
               ((1.0 - phi_d0.array()) * bpp.array()).matrix().asDiagonal();
    out.T_I2 = Minv * Ainv * (phi_dL.array() * bpp.array()).matrix().asDiagonal();
    out.T_v1 = Minv * phi_d3.asDiagonal() * Ainv_eta;
    out.T_v2 = Minv *
               ((1.0 - phi_d3.array()).cast<Complex>() * invden.array())
                   .matrix()
                   .asDiagonal() *
               (point.epsilon() * grid.diff2()) * Ainv_eta;

    out.T = -Minv * (Complex(0, 1) * (Ainv * bpp.asDiagonal()) +
                     Eigen::MatrixXcd(V.asDiagonal()));
    double tmax = out.T.cwiseAbs().maxCoeff();
    out.decomposition_error =
        (out.T + Complex(0, 1) * (out.T_I1 + out.T_I2 + out.T_v1) + out.T_v2)
            .cwiseAbs()
            .maxCoeff() /
        std::max(tmax, 1e-300);
    return out;
}

// ---------------------------------------------------------------------------

std::array<std::pair<double, double>, 3> admissible_exponents(double gamma) {
    return {{{0.0, -gamma},
             {1.0, -gamma + 1},
             {1 - 2 * (2 - gamma), -gamma + 2}}};
}

double weighted_norm(const Grid& grid, const ComplexField& g, const WeightedNormSpec& spec,
                     const WeightField& w, const ParamGeometry& geometry, int k) {
    const int N = grid.size();
    const double dl = geometry.delta;
    const double djk = std::min(dl, 1.0 / k);
    ComplexField dg = grid.derivative(g, 1);
    const ComplexField* fields[2] = {&g, &dg};

    double total = 0;
    for (int beta = 0; beta < 2; ++beta) {
        double l2 = 0, linf = 0;
        for (int m = 0; m < N; ++m) {
            bool inside = w.rho_j[m] - dl <= dl;  // |y - y_j*| <= delta
            double a = std::abs((*fields[beta])[m]);
            if (inside)
                l2 += a * a * grid.spacing();
            else
                linf = std::max(linf, std::pow(w.rho_j[m], spec.sigma1) *
                                          std::pow(w.rho_jk[m], spec.sigma2 + beta) * a);
        }
        total += std::pow(dl, -0.5 + spec.sigma1) * std::pow(djk, spec.sigma2 + beta) *
                     std::sqrt(l2) +
                 linf;
    }
    return total;
}

double weighted_operator_norm(const Grid& grid, const Eigen::MatrixXcd& T,
                              const WeightedNormSpec& spec, const WeightField& w,
                              const ParamGeometry& geometry, int k, int probes) {
    const int N = grid.size();
    std::mt19937 rng(1234);
    std::normal_distribution<double> gauss;
    double best = 0;
    for (int t = 0; t < probes; ++t) {
        ComplexField g(N);
        for (int m = 0; m < N; ++m) g[m] = Complex(gauss(rng), gauss(rng));
        // smooth the probe so the norms are finite and comparable
        ComplexField gs = grid.to_spectral(g);
        for (int m = 0; m < N; ++m)
            gs[m] *= std::exp(-std::pow(std::abs(grid.wavenumbers()[m]) / 8.0, 2));
        g = grid.from_spectral(gs);
        double den = weighted_norm(grid, g, spec, w, geometry, k);
        if (den <= 0) continue;
        double num = weighted_norm(grid, T * g, spec, w, geometry, k);
        best = std::max(best, num / den);
    }
    return best;
}

LapRow lap_constant(const ShearProfile& profile, const SpectralPoint& point,
                    const ParamGeometry& geometry, const Grid& grid,
                    const WeightedNormSpec& spec,
                    std::optional<int> force_degenerate_j) {
    const int N = grid.size();
    const int k = point.k;
    TOperator top = assemble_T(profile, point, geometry, grid, force_degenerate_j);
    Eigen::MatrixXcd IT = Eigen::MatrixXcd::Identity(N, N) + top.T;

    LapRow row{};
    row.lambda = point.lambda;
    row.degenerate = top.degenerate;

    Eigen::MatrixXcd W;
    WeightField w{};
    if (!top.degenerate) {
        // H^1_k: quadratic, the surrogate is exact
        W = double(k) * k * Eigen::MatrixXcd::Identity(N, N) +
            grid.diff1().adjoint() * grid.diff1();
    } else {
        w = weights(profile, geometry, top.j, grid, k, true);
        const double dl = geometry.delta;
        const double djk = std::min(dl, 1.0 / k);
        W = Eigen::MatrixXcd::Zero(N, N);
        for (int beta = 0; beta < 2; ++beta) {
            RealField wb(N);
            for (int m = 0; m < N; ++m) {
                bool inside = w.rho_j[m] - dl <= dl;
                wb[m] = inside ? std::pow(dl, -0.5 + spec.sigma1) *
                                     std::pow(djk, spec.sigma2 + beta) *
                                     std::sqrt(grid.spacing())
                               : std::pow(w.rho_j[m], spec.sigma1) *
                                     std::pow(w.rho_jk[m], spec.sigma2 + beta);
            }
            Eigen::MatrixXcd B = wb.cast<Complex>().asDiagonal();
            if (beta == 1) B = B * grid.diff1();
            W += B.adjoint() * B;
        }
    }
    // guard the Cholesky inside the generalized eigensolver
    W.diagonal().array() += 1e-300;

    Eigen::MatrixXcd A = IT.adjoint() * W * IT;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(A, W);
    const auto& evals = ges.eigenvalues();
    row.kappa2 = std::sqrt(std::max(evals[0], 0.0));

    if (!top.degenerate) {
        row.kappa_mixed = row.kappa2;
        WeightedNormSpec hs = spec;
        row.t_norm = top.T.norm();  // Frobenius upper bound, reported only
        (void)hs;
        return row;
    }

    // evaluate the true mixed norm over the low-lying candidate subspace
    const int nc = std::min<int>(5, N);
    Eigen::MatrixXcd cand = ges.eigenvectors().leftCols(nc);
    auto ratio = [&](const ComplexField& g) {
        double den = weighted_norm(grid, g, spec, w, geometry, k);
        if (den <= 0) return std::numeric_limits<double>::infinity();
        return weighted_norm(grid, ComplexField(IT * g), spec, w, geometry, k) / den;
    };
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < nc; ++c) best = std::min(best, ratio(cand.col(c)));
    std::mt19937 rng(4321);
    std::normal_distribution<double> gauss;
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXcd coef(nc);
        for (int c = 0; c < nc; ++c) coef[c] = Complex(gauss(rng), gauss(rng));
        best = std::min(best, ratio(cand * coef));
    }
    row.kappa_mixed = best;
    row.t_norm = weighted_operator_norm(grid, top.T, spec, w, geometry, k);
    row.pieces = {weighted_operator_norm(grid, top.T_I1, spec, w, geometry, k),
                  weighted_operator_norm(grid, top.T_I2, spec, w, geometry, k),
                  weighted_operator_norm(grid, top.T_v1, spec, w, geometry, k),
                  weighted_operator_norm(grid, top.T_v2, spec, w, geometry, k)};
    return row;
}

// ---------------------------------------------------------------------------

RealField good_derivative_coefficient(const ShearProfile& profile, double lambda,
                                      const Grid& grid) {
    const int N = grid.size();
    // delta2(lambda) = (1/8) min_j sqrt(|lambda - b_j*| / |b''_j*|)
    double d2 = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 2; ++j)
        d2 = std::min(d2, 0.125 * std::sqrt(std::abs(lambda - profile.critical_values()[j]) /
                                            std::abs(profile.critical_curvatures()[j])));
    RealField a = RealField::Zero(N);
    for (int m = 0; m < N; ++m) {
        double y = grid.nodes()[m];
        double c = 1;
        for (int j = 0; j < 2; ++j) {
            double s = wrap_signed(y - profile.critical_points()[j], grid.period());
            c *= 1 - phi0(s / d2);
        }
        if (c == 0.0) continue;
        a[m] = c / profile.deriv(y, 1);
    }
    return a;
}

LambdaDerivative good_derivative(const std::vector<ComplexField>& samples,
                                 const std::vector<double>& lambda_grid,
                                 const ShearProfile& profile, const SpectralPoint& point,
                                 const Grid& grid) {
    const int n = (int)samples.size();
    if (n < 5 || (int)lambda_grid.size() != n)
        throw StencilOutOfRange("need >= 5 consecutive lambda samples");
    const int c = n / 2;
    const double dl = lambda_grid[1] - lambda_grid[0];
    for (int i = 1; i < n; ++i)
        if (std::abs(lambda_grid[i] - lambda_grid[i - 1] - dl) > 1e-10 * std::abs(dl))
            throw StencilOutOfRange("lambda grid must be uniform");
    if (c < 2 || c + 2 >= n) throw StencilOutOfRange("center stencil does not fit");

    const double eps = point.epsilon();
    double band_lo = std::min(-profile.b_max(), profile.b_max());
    double band_hi = std::max(-profile.b_max(), profile.b_max());
    double mind = std::min(std::abs(lambda_grid[c] - profile.critical_values()[0]),
                           std::abs(lambda_grid[c] - profile.critical_values()[1]));
    bool partial_only = lambda_grid[c] < band_lo || lambda_grid[c] > band_hi ||
                        mind < 10 * std::sqrt(eps);

    auto fd4 = [&](const ComplexField& m2, const ComplexField& m1, const ComplexField& p1,
                   const ComplexField& p2) -> ComplexField {
        return (m2 - 8 * m1 + 8 * p1 - p2) / (12 * dl);
    };
    auto apply_D = [&](int i) -> ComplexField {
        ComplexField d = fd4(samples[i - 2], samples[i - 1], samples[i + 1], samples[i + 2]);
        if (!partial_only) {
            RealField a = good_derivative_coefficient(profile, lambda_grid[i], grid);
            d += (a.cast<Complex>().array() * grid.derivative(samples[i], 1).array()).matrix();
        }
        return d;
    };

    LambdaDerivative out;
    out.partial_only = partial_only;
    out.a = partial_only ? RealField::Zero(grid.size())
                         : good_derivative_coefficient(profile, lambda_grid[c], grid);
    out.d1 = apply_D(c);
    if (c >= 4 && c + 4 < n) {
        ComplexField g[5];
        for (int o = -2; o <= 2; ++o) g[o + 2] = apply_D(c + o);
        out.d2 = fd4(g[0], g[1], g[3], g[4]);
        if (!partial_only)
            out.d2 += (out.a.cast<Complex>().array() * grid.derivative(g[2], 1).array())
                          .matrix();
        out.has_d2 = true;
    }
    return out;
}

// ---------------------------------------------------------------------------

EmbeddedScan embedded_eigenvalue_scan(const ShearProfile& profile, const Grid& grid, int k,
                                      const std::vector<double>& lambda_grid) {
    const int N = grid.size();
    EmbeddedScan scan;
    scan.floor = std::numeric_limits<double>::infinity();

    for (double lambda : lambda_grid) {
        Eigen::MatrixXcd R =
            double(k) * k * Eigen::MatrixXcd::Identity(N, N) - grid.diff2();
        // all roots of b - lambda, by sign change plus bisection
        std::vector<double> roots;
        for (int m = 0; m < N; ++m) {
            double a = grid.nodes()[m];
            double c = a + grid.spacing();
            double fa = profile.b(a) - lambda, fc = profile.b(c) - lambda;
            if (fa == 0) roots.push_back(a);
            if (fa * fc >= 0) continue;
            for (int it = 0; it < 100; ++it) {
                double mid = 0.5 * (a + c);
                double fm = profile.b(mid) - lambda;
                if (fa * fm <= 0) {
                    c = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push_back(0.5 * (a + c));
        }
        for (int m = 0; m < N; ++m) {
            double y = grid.nodes()[m];
            double dist = std::numeric_limits<double>::infinity();
            for (double z : roots) dist = std::min(dist, grid.periodic_distance(y, z));
            if (dist < grid.spacing()) continue;  // symmetric-cell P.V. exclusion
            R(m, m) += profile.deriv(y, 2) / (profile.b(y) - lambda);
        }
        for (double z : roots) {
            int nz = grid.nearest_node(z);
            R(nz, nz) += Complex(0, M_PI) * profile.deriv(z, 2) /
                         std::abs(profile.deriv(z, 1)) / grid.spacing();
        }
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(R);
        double smin = svd.singularValues()(N - 1);
        scan.rows.push_back({lambda, smin});
        scan.floor = std::min(scan.floor, smin);
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(
        assemble_Lk(profile, grid, k, std::nullopt));
    scan.rayleigh_spectrum.assign(es.eigenvalues().data(),
                                  es.eigenvalues().data() + N);
    return scan;
}

// ---------------------------------------------------------------------------

double calibrate_c_dagger(const ShearProfile& profile, const Grid& grid, int k, double nu,
                          double gamma) {
    const double p = profile.period();
    // generic interior point of Sigma_{1,delta0}
    double lambda = profile.critical_values()[0] - 0.5 * profile.sigma_halfwidth(0);
    for (double cd : {10.0, 8.0, 6.0, 5.0, 4.0, 3.0, 2.5, 2.0, 1.5, 1.0}) {
        GeometryConfig cfg;
        cfg.c_dagger = cd;
        SpectralPoint pt(lambda, 0.0, nu, k);
        ParamGeometry geo = param_geometry(profile, pt, cfg);
        // the edge of Sigma maximizes delta1
        double edge = profile.critical_values()[0] - profile.sigma_halfwidth(0);
        SpectralPoint pe(edge, 0.0, nu, k);
        ParamGeometry ge = param_geometry(profile, pe, cfg);
        if (std::max(geo.delta, ge.delta) > p / 8) continue;
        WeightedNormSpec spec{0.0, -gamma, gamma, 0};
        try {
            LapRow row = lap_constant(profile, pt, geo, grid, spec, 0);
            if (row.pieces[2] + row.pieces[3] <= 0.5) return cd;
        } catch (const Error&) {
            continue;
        }
    }
    return 1.0;
}

}  // namespace oscar
