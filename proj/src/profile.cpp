#include "oscar/profile.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <limits>

namespace oscar {

namespace {

constexpr double kRootTol = 1e-12;
constexpr double kKappaMin = 1e-3;

double wrap(double y, double p) {
    double u = std::fmod(y, p);
    return u < 0 ? u + p : u;
}

/// Trigonometric interpolant of periodic samples; exact derivatives of the
/// band-limited representative (the table family needs b in C^4).
ShearProfile::Evaluator table_evaluator(double p, std::vector<double> samples) {
    const int N = (int)samples.size();
    Eigen::FFT<double> fft;
    std::vector<Complex> in(N), coef(N);
    for (int m = 0; m < N; ++m) in[m] = samples[m];
    fft.fwd(coef, in);
    for (auto& c : coef) c /= (double)N;
    const double dl = 2.0 * M_PI / p;
    return [=](double y, int order) {
        Complex acc(0, 0);
        for (int m = 0; m < N; ++m) {
            int freq = (m < N / 2) ? m : m - N;
            if (order % 2 == 1 && m == N / 2) continue;  // drop Nyquist for odd orders
            Complex il(0, dl * freq);
            Complex f = coef[m] * std::exp(il * y);
            for (int d = 0; d < order; ++d) f *= il;
            acc += f;
        }
        return acc.real();
    };
}

}  // namespace

ShearProfile ShearProfile::unchecked(double period, Evaluator eval,
                                     std::array<double, 2> y_star,
                                     std::array<double, 2> b_star,
                                     std::array<double, 2> bpp_star) {
    ShearProfile pr;
    pr.period_ = period;
    pr.eval_ = std::move(eval);
    pr.y_star_ = y_star;
    pr.b_star_ = b_star;
    pr.bpp_star_ = bpp_star;
    pr.kappa_ = 0.5;
    pr.delta0_ = 0.1;
    pr.c4_norm_ = 1.0;
    pr.b_max_ = 1.0;
    return pr;
}

double ShearProfile::sigma_halfwidth(int j) const {
    return std::abs(bpp_star_[j]) * delta0_ * delta0_ / 16.0;
}

bool ShearProfile::in_sigma(double lambda, int j) const {
    return std::abs(lambda - b_star_[j]) <= sigma_halfwidth(j);
}

int ShearProfile::nearest_critical(double lambda) const {
    return std::abs(lambda - b_star_[0]) <= std::abs(lambda - b_star_[1]) ? 0 : 1;
}

double ShearProfile::periodic_distance(double y, double z) const {
    double d = std::fmod(std::abs(y - z), period_);
    return std::min(d, period_ - d);
}

ShearProfile build_profile(const ProfileSpec& spec) {
    if (spec.period <= 2.0 * M_PI)
        throw PeriodTooSmall("period must exceed 2*pi, got " + std::to_string(spec.period));

    ShearProfile pr;
    pr.period_ = spec.period;
    const double p = spec.period;

    if (spec.family == "kolmogorov") {
        const double w = 2.0 * M_PI / p;
        pr.eval_ = [w](double y, int order) {
            switch (order) {
                case 0: return std::sin(w * y);
                case 1: return w * std::cos(w * y);
                case 2: return -w * w * std::sin(w * y);
                case 3: return -w * w * w * std::cos(w * y);
                case 4: return w * w * w * w * std::sin(w * y);
                default: throw Error("derivative order out of range");
            }
        };
    } else if (spec.family == "table") {
        if (spec.samples.size() < 8 || spec.samples.size() % 2 != 0)
            throw ConfigInvalid("table profile needs an even number (>= 8) of samples");
        pr.eval_ = table_evaluator(p, spec.samples);
    } else {
        throw ConfigInvalid("unknown profile family '" + spec.family + "'");
    }

    // locate critical points: sign changes of b' on a fine grid, then bisection + Newton
    const int M = 8192;
    std::vector<double> roots;
    double prev = pr.eval_(0.0, 1);
    for (int m = 1; m <= M; ++m) {
        double y = p * m / M;
        double cur = pr.eval_(y, 1);
        if (prev == 0.0 || prev * cur < 0) {
            double lo = p * (m - 1) / M, hi = y;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                double f = pr.eval_(mid, 1);
                if (f == 0.0) { lo = hi = mid; break; }
                if (f * pr.eval_(lo, 1) < 0) hi = mid; else lo = mid;
            }
            double r = 0.5 * (lo + hi);
            for (int it = 0; it < 8; ++it) {
                double f = pr.eval_(r, 1), df = pr.eval_(r, 2);
                if (std::abs(df) < 1e-14) break;
                double step = f / df;
                r -= step;
                if (std::abs(step) < kRootTol) break;
            }
            r = wrap(r, p);
            bool dup = false;
            for (double q : roots)
                if (pr.periodic_distance(q, r) < 1e-8) dup = true;
            if (!dup) roots.push_back(r);
        }
        prev = cur;
    }
    if (roots.size() != 2)
        throw WrongCriticalCount("found " + std::to_string(roots.size()) + " critical points");
    std::sort(roots.begin(), roots.end());
    for (int j = 0; j < 2; ++j) {
        pr.y_star_[j] = roots[j];
        pr.b_star_[j] = pr.eval_(roots[j], 0);
        pr.bpp_star_[j] = pr.eval_(roots[j], 2);
        if (std::abs(pr.bpp_star_[j]) < kKappaMin)
            throw DegenerateCritical("|b''(y*)| = " + std::to_string(std::abs(pr.bpp_star_[j])));
    }

    // structure constants: kappa from (|b''(y*)| in [kappa, 1/kappa], ||b||_C4 <= 1/kappa)
    double c4 = 0, bmax = 0;
    for (int m = 0; m < M; ++m) {
        double y = p * m / M;
        bmax = std::max(bmax, std::abs(pr.eval_(y, 0)));
        for (int d = 0; d <= 4; ++d) c4 = std::max(c4, std::abs(pr.eval_(y, d)));
    }
    pr.c4_norm_ = c4;
    pr.b_max_ = bmax;
    double min_bpp = std::min(std::abs(pr.bpp_star_[0]), std::abs(pr.bpp_star_[1]));
    double max_bpp = std::max(std::abs(pr.bpp_star_[0]), std::abs(pr.bpp_star_[1]));
    pr.kappa_ = std::min({min_bpp, 1.0 / max_bpp, 1.0 / c4, 0.999});
    if (pr.kappa_ < kKappaMin) throw DegenerateCritical("no admissible kappa");

    // largest delta0 < 1/8 satisfying the separation and b''' smallness conditions
    double sep = pr.periodic_distance(pr.y_star_[0], pr.y_star_[1]);
    double d0 = std::min(0.125, sep / 10.0) * 0.999;
    for (int it = 0; it < 64; ++it) {
        double sup3 = 0;
        for (int j = 0; j < 2; ++j)
            for (int m = 0; m <= 200; ++m) {
                double y = pr.y_star_[j] - 4 * d0 + 8.0 * d0 * m / 200;
                sup3 = std::max(sup3, std::abs(pr.eval_(y, 3)));
            }
        if (sup3 * d0 < min_bpp / 10.0) break;
        d0 = 0.9 * (min_bpp / 10.0) / std::max(sup3, 1e-300);
        d0 = std::min(d0, std::min(0.125, sep / 10.0) * 0.999);
    }
    pr.delta0_ = d0;
    return pr;
}

SpectralPoint::SpectralPoint(double lambda_, double alpha_, double nu_, int k_, double ss)
    : lambda(lambda_), alpha(alpha_), nu(nu_), k(k_), sigma_sharp(ss) {
    if (k < 1) throw Error("SpectralPoint: k must be >= 1");
    double eps = nu / k;
    if (!(eps > 0 && eps < 0.125)) throw Error("SpectralPoint: eps = nu/k must lie in (0, 1/8)");
    if (alpha < -sigma_sharp * std::sqrt(eps) * (1 + 1e-12))
        throw AlphaOutOfRange("alpha below -sigma_sharp*sqrt(eps)");
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Nondegenerate: return "nondegenerate";
        case Regime::AlphaDominated: return "alpha_dominated";
        case Regime::Intermediate: return "intermediate";
        case Regime::Viscous: return "viscous";
    }
    return "?";
}

ParamGeometry param_geometry(const ShearProfile& profile, const SpectralPoint& point,
                             const GeometryConfig& cfg) {
    ParamGeometry g{};
    g.c_dagger = cfg.c_dagger;
    const double eps = point.epsilon();
    double min_sqrt = std::numeric_limits<double>::infinity();
    double min_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 2; ++j) {
        double dist = std::abs(point.lambda - profile.critical_values()[j]);
        min_dist = std::min(min_dist, dist);
        min_sqrt = std::min(min_sqrt, std::sqrt(dist / std::abs(profile.critical_curvatures()[j])));
        g.sigma_member[j] = profile.in_sigma(point.lambda, j);
    }
    g.min_crit_dist = min_dist;
    g.delta1 = 8.0 * min_sqrt;
    g.delta2 = g.delta1 / 64.0;
    g.delta = std::sqrt(std::abs(point.alpha)) + cfg.c_dagger * std::pow(eps, 0.25) + 8.0 * min_sqrt;

    // beta from min_j |b* - lambda| ~ eps^{2 beta}; exact critical value -> viscous branch
    if (min_dist <= 0)
        g.beta = 0.25;
    else
        g.beta = std::clamp(std::log(min_dist) / (2.0 * std::log(eps)), 0.0, 0.25);

    if (point.alpha >= profile.delta0()) {
        g.regime = Regime::AlphaDominated;
    } else if (min_dist <= cfg.m_visc * std::sqrt(eps)) {
        g.regime = Regime::Viscous;
    } else if (g.sigma_member[0] || g.sigma_member[1]) {
        g.regime = Regime::Intermediate;
    } else {
        g.regime = Regime::Nondegenerate;
    }
    return g;
}

WeightField weights(const ShearProfile& profile, const ParamGeometry& geometry, int j,
                    const Grid& grid, int k, bool override_delta_check) {
    const double p = profile.period();
    if (!override_delta_check && geometry.delta > p / 8.0)
        throw DeltaTooLarge("delta(Lambda) = " + std::to_string(geometry.delta) + " > p/8");
    WeightField w;
    const int N = grid.size();
    w.rho_j.resize(N);
    w.rho_jk.resize(N);
    const double ystar = profile.critical_points()[j];
    for (int m = 0; m < N; ++m) {
        double d = grid.periodic_distance(grid.nodes()[m], ystar);
        w.rho_j[m] = d + geometry.delta;
        w.rho_jk[m] = std::min(w.rho_j[m], 1.0 / k);
    }
    w.d_jk = std::min(geometry.delta, 1.0 / k);
    w.s_lo = ystar - geometry.delta;
    w.s_hi = ystar + geometry.delta;
    return w;
}

}  // namespace oscar
