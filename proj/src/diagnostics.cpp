#include "oscar/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "oscar/field_io.hpp"

namespace oscar {

namespace {

struct LineFit {
    double slope, intercept, r2;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = (int)x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i]; syy += y[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    LineFit f{};
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_tot = syy - sy * sy / n, ss_res = 0;
    for (int i = 0; i < n; ++i) {
        double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
    }
    f.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1;
    return f;
}

/// 95% band half-width of the slope from bootstrap resampling of the points.
double bootstrap_slope_band(const std::vector<double>& x, const std::vector<double>& y,
                            unsigned seed) {
    const int n = (int)x.size();
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<double> slopes;
    for (int b = 0; b < 200; ++b) {
        std::vector<double> xs(n), ys(n);
        for (int i = 0; i < n; ++i) {
            int q = pick(rng);
            xs[i] = x[q];
            ys[i] = y[q];
        }
        slopes.push_back(least_squares(xs, ys).slope);
    }
    std::sort(slopes.begin(), slopes.end());
    return (slopes[194] - slopes[5]) / 2;
}

void collect_window(const std::vector<double>& t, const std::vector<double>& v, double t_lo,
                    double t_hi, bool log_t, std::vector<double>& x, std::vector<double>& y) {
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi || v[i] <= 0) continue;
        x.push_back(log_t ? std::log(t[i]) : t[i]);
        y.push_back(std::log(v[i]));
    }
    if (x.size() < 4) throw WindowTooShort("fewer than 4 usable samples in the fit window");
}

}  // namespace

RateFit fit_power_law(const std::vector<double>& t, const std::vector<double>& v,
                      double t_lo, double t_hi, unsigned seed) {
    std::vector<double> x, y;
    collect_window(t, v, t_lo, t_hi, true, x, y);
    LineFit f = least_squares(x, y);
    RateFit out;
    out.t_lo = t_lo;
    out.t_hi = t_hi;
    out.exponent = f.slope;
    out.uncertainty = bootstrap_slope_band(x, y, seed);
    out.r2 = f.r2;
    return out;
}

RateFit fit_exponential(const std::vector<double>& t, const std::vector<double>& v,
                        double t_lo, double t_hi, unsigned seed) {
    std::vector<double> x, y;
    collect_window(t, v, t_lo, t_hi, false, x, y);
    LineFit f = least_squares(x, y);
    RateFit out;
    out.t_lo = t_lo;
    out.t_hi = t_hi;
    out.rate = -f.slope;
    out.uncertainty = bootstrap_slope_band(x, y, seed);
    out.r2 = f.r2;
    out.exponential = true;
    return out;
}

std::vector<RateFit> fit_rates(const EvolutionState& state, const Grid& grid,
                               const ShearProfile& profile, const RateSpec& spec) {
    const int n = (int)state.t.size();
    const int N = grid.size();
    std::vector<double> ux_sup(n), psi_w(n), enst(n);
    RealField weight(N);
    for (int m = 0; m < N; ++m) {
        double y = grid.nodes()[m];
        weight[m] = std::pow(profile.periodic_distance(y, profile.critical_points()[0]),
                             2 - spec.gamma) +
                    std::pow(profile.periodic_distance(y, profile.critical_points()[1]),
                             2 - spec.gamma);
    }
    for (int i = 0; i < n; ++i) {
        ux_sup[i] = velocity_x(grid, state.psi[i]).cwiseAbs().maxCoeff();
        psi_w[i] = (weight.array() * state.psi[i].cwiseAbs().array()).maxCoeff();
        enst[i] = std::exp(state.nu * state.k * state.k * state.t[i]) *
                  state.omega[i].norm() * std::sqrt(grid.spacing());
    }
    double lo = std::max(spec.t_lo, spec.t_min);

    // the algebraic damping laws sit under the shared semigroup decay
    // (heat + mixing-enhanced); measure that rate on the enstrophy first and
    // compensate it out before fitting the powers
    RateFit enh = fit_exponential(state.t, enst, lo, spec.t_hi, spec.seed);
    enh.quantity = "compensated enstrophy";
    double total_rate = std::max(enh.rate, 0.0) + state.nu * state.k * state.k;
    std::vector<double> ux_c(n), psi_c(n);
    for (int i = 0; i < n; ++i) {
        double boost = std::exp(total_rate * state.t[i]);
        ux_c[i] = ux_sup[i] * boost;
        psi_c[i] = psi_w[i] * boost;
    }

    std::vector<RateFit> fits;
    fits.push_back(fit_power_law(state.t, ux_c, lo, spec.t_hi, spec.seed));
    fits.back().quantity = "sup|u^x|";
    fits.push_back(fit_power_law(state.t, psi_c, lo, spec.t_hi, spec.seed));
    fits.back().quantity = "weighted sup|psi|";
    fits.push_back(enh);
    return fits;
}

DepletionProfile depletion_profile(const std::vector<EvolutionState>& runs,
                                   const std::vector<double>& nus, const Grid& grid,
                                   const ShearProfile& profile, int j, double gamma,
                                   double m_k) {
    DepletionProfile prof;
    prof.gamma = gamma;
    int node = grid.nearest_node(profile.critical_points()[j]);
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    for (size_t r = 0; r < runs.size(); ++r) {
        const auto& st = runs[r];
        int n = (int)st.t.size();
        int q0 = 3 * n / 4;
        // take out the shared semigroup decay (heat + mixing-enhanced),
        // measured on the enstrophy over the same late window, so the
        // plateau level reads the algebraic depletion factor alone
        std::vector<double> enst(n);
        for (int i = 0; i < n; ++i)
            enst[i] = std::exp(st.nu * st.k * st.k * st.t[i]) * st.omega[i].norm();
        double rate = 0;
        try {
            rate = std::max(fit_exponential(st.t, enst, st.t[q0], st.t[n - 1], 7).rate, 0.0);
        } catch (const WindowTooShort&) {
        }
        double total_rate = rate + st.nu * st.k * st.k;
        std::vector<double> tail, first_half, second_half;
        for (int i = q0; i < n; ++i) {
            double a = std::abs(st.omega[i][node]) * std::exp(total_rate * st.t[i]);
            tail.push_back(a);
            (i < q0 + (n - q0) / 2 ? first_half : second_half).push_back(a);
        }
        double m1 = median(first_half), m2 = median(second_half);
        if (std::abs(m1 - m2) > 0.3 * std::max(m1, m2))
            throw NoPlateaus("late-time window still transient");
        prof.nu.push_back(nus[r]);
        prof.plateau.push_back(median(tail) / m_k);
    }
    std::vector<double> x, y;
    for (size_t r = 0; r < prof.nu.size(); ++r) {
        x.push_back(std::log(prof.nu[r]));
        y.push_back(std::log(std::max(prof.plateau[r], 1e-300)));
    }
    LineFit f = least_squares(x, y);
    prof.slope = f.slope;
    prof.slope_err = bootstrap_slope_band(x, y, 7);
    return prof;
}

std::string RunManifest::to_json() const {
    std::ostringstream os;
    os << "{\n";
    os << "  \"version\": \"" << version << "\",\n";
    os << "  \"profile_hash\": \"" << profile_hash << "\",\n";
    os << "  \"grid\": {\"n\": " << grid_n << ", \"period\": " << format_full(grid_period)
       << "},\n";
    os << "  \"constants\": {\"c_dagger\": " << format_full(c_dagger)
       << ", \"sigma_sharp\": " << format_full(sigma_sharp)
       << ", \"sigma0\": " << format_full(sigma0) << "},\n";
    os << "  \"wall_seconds\": " << format_full(wall_seconds) << ",\n";
    os << "  \"config\": " << config_snapshot << ",\n";
    os << "  \"artifacts\": [";
    for (size_t i = 0; i < artifacts.size(); ++i) {
        if (i) os << ", ";
        os << "{\"path\": \"" << artifacts[i].first << "\", \"fnv1a\": \""
           << artifacts[i].second << "\"}";
    }
    os << "]\n}\n";
    return os.str();
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write manifest: " + path);
    out << to_json();
}

}  // namespace oscar
