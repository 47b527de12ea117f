#include "oscar/airy.hpp"

#include <algorithm>
#include <cmath>

#include "oscar/cutoff.hpp"

namespace oscar {

namespace {

std::shared_ptr<const Grid> borrow(const Grid& grid) {
    return {std::shared_ptr<const Grid>(), &grid};
}

double wrap_signed(double s, double p) {
    s = std::fmod(s, p);
    if (s < -p / 2) s += p;
    if (s >= p / 2) s -= p;
    return s;
}

}  // namespace

ComplexField apply_A(const ShearProfile& profile, const SpectralPoint& point, const Grid& grid,
                     const ComplexField& field) {
    const double eps = point.epsilon();
    ComplexField out = eps * grid.derivative(field, 2);
    for (int m = 0; m < grid.size(); ++m) {
        double b = profile.b(grid.nodes()[m]);
        out[m] += (Complex(0, point.lambda - b) - point.alpha) * field[m];
    }
    return out;
}

AirySolver::AirySolver(std::shared_ptr<const Grid> grid, const ShearProfile& profile,
                       const SpectralPoint& point, double sigma0)
    : grid_(std::move(grid)), point_(point) {
    const double eps = point.epsilon();
    if (point.alpha < -sigma0 * std::sqrt(eps) * (1 + 1e-12))
        throw AlphaOutOfRange("alpha below -sigma0*sqrt(eps)");
    const int N = grid_->size();
    ComplexField c2 = ComplexField::Constant(N, eps), c0(N);
    for (int m = 0; m < N; ++m) {
        double b = profile.b(grid_->nodes()[m]);
        c0[m] = Complex(-point.alpha, point.lambda - b);
    }
    op_ = std::make_shared<PeriodicOperator>(grid_, c2, c0);
}

ComplexField AirySolver::solve(const ComplexField& rhs) const { return op_->solve(rhs); }

const Eigen::MatrixXcd& AirySolver::inverse() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!inv_) inv_ = std::make_shared<Eigen::MatrixXcd>(op_->dense().partialPivLu().inverse());
    return *inv_;
}

ComplexField solve_A(const ShearProfile& profile, const SpectralPoint& point, const Grid& grid,
                     const ComplexField& rhs, double sigma0) {
    AirySolver solver(borrow(grid), profile, point, sigma0);
    return solver.solve(rhs);
}

Eigen::MatrixXcd airy_kernel(const ShearProfile& profile, const SpectralPoint& point,
                             const Grid& grid, double sigma0) {
    AirySolver solver(borrow(grid), profile, point, sigma0);
    // column n = A^{-1} (impulse at z_n) = inverse()[:,n] / h
    return solver.inverse() / grid.spacing();
}

AiryScale airy_scale(const ShearProfile& profile, const SpectralPoint& point, const Grid& grid,
                     int j) {
    AiryScale s;
    const int N = grid.size();
    const double eps = point.epsilon();
    const double dist = std::abs(point.lambda - profile.critical_values()[j]);
    s.L_j.resize(N);
    s.L.resize(N);
    for (int m = 0; m < N; ++m) {
        double dl = point.lambda - profile.b(grid.nodes()[m]);
        if (dist >= std::sqrt(eps)) {
            double scale = std::pow(eps, -1.0 / 3.0) * std::pow(dist, -1.0 / 3.0);
            s.L_j[m] = std::pow(eps, 1.0 / 3.0) * std::pow(dist, -1.0 / 6.0) /
                       std::sqrt(bracket(scale * dl, scale * point.alpha));
        } else {
            double scale = std::pow(eps, -0.5);
            s.L_j[m] = std::pow(eps, 0.25) / std::sqrt(bracket(scale * dl, scale * point.alpha));
        }
        double sc = std::pow(eps, -1.0 / 3.0);
        s.L[m] = std::pow(eps, 1.0 / 3.0) / std::sqrt(bracket(sc * dl, sc * point.alpha));
    }
    return s;
}

namespace {

/// Envelope split into prefactor P(z) and exponent shape X(y,z); the bound is
/// C * P(z) * exp(-c0 * X(y,z)).
struct EnvelopeParts {
    RealField pref;
    Eigen::MatrixXd X;
};

EnvelopeParts envelope_parts(const ShearProfile& profile, const SpectralPoint& point,
                             const ParamGeometry& geometry, const Grid& grid) {
    const int N = grid.size();
    const double eps = point.epsilon();
    double row_pow, arg_pow, dist_pow;  // eps exponents of the three regime scalings
    switch (geometry.regime) {
        case Regime::Viscous:
            row_pow = -0.75;  arg_pow = -0.5;  dist_pow = -0.25;
            break;
        case Regime::Intermediate: {
            double beta = geometry.beta;
            row_pow = -(2.0 + beta) / 3.0;
            arg_pow = -(1.0 + 2.0 * beta) / 3.0;
            dist_pow = -(1.0 - beta) / 3.0;
            break;
        }
        default:  // nondegenerate and alpha-dominated use the order-one-distance form
            row_pow = -2.0 / 3.0;  arg_pow = -1.0 / 3.0;  dist_pow = -1.0 / 3.0;
            break;
    }
    EnvelopeParts ep;
    ep.pref.resize(N);
    ep.X.resize(N, N);
    const double sc = std::pow(eps, arg_pow);
    std::vector<double> bl(N);
    for (int m = 0; m < N; ++m) bl[m] = profile.b(grid.nodes()[m]) - point.lambda;
    for (int n = 0; n < N; ++n)
        ep.pref[n] = std::pow(eps, row_pow) / std::sqrt(bracket(sc * point.alpha, sc * bl[n]));
    const double dsc = std::pow(eps, dist_pow);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
            double br = bracket(sc * point.alpha, sc * bl[m], sc * bl[n]);
            ep.X(m, n) =
                std::sqrt(br) * grid.periodic_distance(grid.nodes()[m], grid.nodes()[n]) * dsc;
        }
    return ep;
}

}  // namespace

Eigen::MatrixXd envelope(const ShearProfile& profile, const SpectralPoint& point,
                         const ParamGeometry& geometry, const Grid& grid, double c0) {
    EnvelopeParts ep = envelope_parts(profile, point, geometry, grid);
    const int N = grid.size();
    Eigen::MatrixXd E(N, N);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) E(m, n) = ep.pref[n] * std::exp(-c0 * ep.X(m, n));
    return E;
}

EnvelopeFit fit_envelope(const Eigen::MatrixXcd& K, const ShearProfile& profile,
                         const SpectralPoint& point, const ParamGeometry& geometry,
                         const Grid& grid) {
    EnvelopeParts ep = envelope_parts(profile, point, geometry, grid);
    const int N = grid.size();
    const double kmax = K.cwiseAbs().maxCoeff();
    // regress log(|K|/P) on X over the off-diagonal band above the noise floor
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    long cnt = 0;
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
            double a = std::abs(K(m, n));
            if (m == n || a < 1e-13 * kmax) continue;
            double x = ep.X(m, n);
            if (x <= 0) continue;
            double u = std::log(a / ep.pref[n]);
            sx += x; sy += u; sxx += x * x; sxy += x * u; syy += u * u;
            ++cnt;
        }
    EnvelopeFit fit{};
    if (cnt < 8) throw Error("fit_envelope: too few samples");
    double denom = cnt * sxx - sx * sx;
    double slope = (cnt * sxy - sx * sy) / denom;
    fit.c0 = std::max(-slope, 1e-6);
    double ss_res = 0, mean_u = sy / cnt;
    double ss_tot = syy - cnt * mean_u * mean_u;
    double intercept = (sy - slope * sx) / cnt;
    (void)intercept;
    // C taken as the sup ratio against the fitted-rate envelope
    double C = 0;
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
            double e = ep.pref[n] * std::exp(-fit.c0 * ep.X(m, n));
            C = std::max(C, std::abs(K(m, n)) / e);
        }
    fit.C = C;
    // R^2 of the regression
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
            double a = std::abs(K(m, n));
            if (m == n || a < 1e-13 * kmax) continue;
            double x = ep.X(m, n);
            if (x <= 0) continue;
            double u = std::log(a / ep.pref[n]);
            double pred = intercept + slope * x;
            ss_res += (u - pred) * (u - pred);
        }
    fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

// ---------------------------------------------------------------------------

namespace {

Complex w_integrand(double xi, double c, double y) {
    double re = xi * xi * xi / 3.0 + c * xi;
    return std::exp(Complex(re, y * xi));
}

Complex adaptive_simpson(double c, double y, double a, double b, Complex fa, Complex fm,
                         Complex fb, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    Complex flm = w_integrand(lm, c, y), frm = w_integrand(rm, c, y);
    Complex whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    Complex left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    Complex right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    Complex err = left + right - whole;
    if (std::abs(err) < 15 * tol) return left + right + err / 15.0;
    if (depth <= 0) throw QuadratureFailure("adaptive depth exhausted");
    return adaptive_simpson(c, y, a, m, fa, flm, fm, tol / 2, depth - 1) +
           adaptive_simpson(c, y, m, b, fm, frm, fb, tol / 2, depth - 1);
}

}  // namespace

Complex w_special_point(double c, double y, double abs_tol) {
    // truncation: integrand magnitude below 1e-30
    double T = 20.0;
    while (-T * T * T / 3.0 - c * T > -70.0) T *= 1.25;
    // initial panels sized to the oscillation of e^{i y xi}
    int panels = std::max(64, (int)std::ceil(T * (std::abs(y) + 5.0) / 3.0));
    Complex total(0, 0);
    double tol = abs_tol / panels;
    for (int i = 0; i < panels; ++i) {
        double a = -T + T * i / panels, b = -T + T * (i + 1) / panels;
        Complex fa = w_integrand(a, c, y), fb = w_integrand(b, c, y);
        Complex fm = w_integrand(0.5 * (a + b), c, y);
        total += adaptive_simpson(c, y, a, b, fa, fm, fb, tol, 24);
    }
    return -total;
}

WFunction w_special(double c, const std::vector<double>& y_samples, double sigma0) {
    if (c < -sigma0) throw AlphaOutOfRange("w_special: c below -sigma0");
    WFunction w;
    w.c = c;
    w.w0 = w_special_point(c, 0.0);
    w.values.reserve(y_samples.size());
    for (double y : y_samples) w.values.push_back(w_special_point(c, y));
    return w;
}

// ---------------------------------------------------------------------------

std::pair<double, double> crossing_points(const ShearProfile& profile, double lambda, int j) {
    const double p = profile.period();
    const double ys = profile.critical_points()[j];
    const double yo = profile.critical_points()[1 - j];
    auto find_root = [&](double lo, double hi) {
        double flo = profile.b(lo) - lambda, fhi = profile.b(hi) - lambda;
        if (flo * fhi > 0) throw RegimeMismatch("lambda not attained on the branch");
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double f = profile.b(mid) - lambda;
            if (std::abs(hi - lo) < 1e-14) break;
            if (f * flo <= 0) { hi = mid; } else { lo = mid; flo = f; }
        }
        return 0.5 * (lo + hi);
    };
    // adjacent critical point in each direction (two critical points on the circle)
    double d_pos = std::fmod(yo - ys + p, p);
    double d_neg = p - d_pos;
    double margin = 1e-9;
    double y_plus = find_root(ys + margin, ys + d_pos - margin);
    double y_minus = find_root(ys - d_neg + margin, ys - margin);
    return {y_plus, y_minus};
}

SingularDecomposition singular_decomposition(const ShearProfile& profile,
                                             const SpectralPoint& point, const Grid& grid,
                                             const ComplexField& h, int j, double sigma0) {
    const double eps = point.epsilon();
    const double dist = std::abs(point.lambda - profile.critical_values()[j]);
    if (dist <= 4.0 * std::sqrt(eps))
        throw RegimeMismatch("|lambda - b(y_j*)| must exceed 4*sqrt(eps)");
    if (point.alpha > 0.5 * std::pow(eps, 1.0 / 3.0) * std::pow(dist, 1.0 / 3.0))
        throw RegimeMismatch("alpha too large for the two-crossing model");

    auto [y_plus, y_minus] = crossing_points(profile, point.lambda, j);

    AirySolver solver(borrow(grid), profile, point, sigma0);
    ComplexField u = solver.solve(h);

    const int N = grid.size();
    const double p = grid.period();
    SingularDecomposition out;
    out.y_plus = y_plus;
    out.y_minus = y_minus;
    out.w2 = ComplexField::Zero(N);
    out.model = ComplexField::Zero(N);
    const double ell = std::pow(eps, 1.0 / 3.0) * std::pow(dist, 1.0 / 3.0);
    const double halfwidth = std::sqrt(dist);
    double sup_res = 0;

    for (double yc : {y_plus, y_minus}) {
        double bp = profile.deriv(yc, 1);
        Complex hc = h[grid.nearest_node(yc)];
        if (std::abs(bp) < 1e-12) throw RegimeMismatch("crossing point degenerate");
        double wf = std::pow(eps, -1.0 / 3.0) * std::pow(std::abs(bp), -2.0 / 3.0);
        double c_param = wf * point.alpha;
        double arg_scale = std::pow(eps, -1.0 / 3.0) * std::pow(std::abs(bp), 1.0 / 3.0);
        for (int m = 0; m < N; ++m) {
            double s = wrap_signed(grid.nodes()[m] - yc, p);
            double cut = phi_narrow(s / halfwidth);
            if (cut == 0.0) continue;
            Complex Wv = w_special_point(c_param, s * arg_scale);
            out.w2[m] += wf * hc * Wv * cut;
            out.model[m] += hc * cut / (Complex(0, bp * s) + ell);
        }
    }
    out.w1 = u - out.w2;
    for (int m = 0; m < N; ++m)
        sup_res = std::max(sup_res, std::abs(out.w2[m] - out.model[m]));
    out.model_residual_sup = sup_res;
    return out;
}

}  // namespace oscar
