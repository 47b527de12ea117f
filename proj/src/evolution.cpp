#include "oscar/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <unsupported/Eigen/MatrixFunctions>

namespace oscar {

ComplexField velocity_x(const Grid& grid, const ComplexField& psi) {
    return -grid.derivative(psi, 1);
}

ComplexField velocity_y(int k, const ComplexField& psi) {
    return Complex(0, k) * psi;
}

namespace {

Eigen::MatrixXcd mode_generator(const ShearProfile& profile, const Grid& grid, int k,
                                double nu) {
    // d omega/dt = (k L_{k,nu} - nu k^2) omega
    Eigen::MatrixXcd M = double(k) * assemble_Lk(profile, grid, k, nu);
    M.diagonal().array() -= nu * double(k) * k;
    return M;
}

}  // namespace

EvolutionState evolve_direct(const ShearProfile& profile, const Grid& grid, int k, double nu,
                             const ComplexField& omega0k, const std::vector<double>& t_grid) {
    if (grid.size() > 1024)
        return evolve_direct_stepping(profile, grid, k, nu, omega0k, t_grid);
    Eigen::MatrixXcd M = mode_generator(profile, grid, k, nu);
    const Eigen::MatrixXcd& Hinv = grid.helmholtz_inverse(k);

    EvolutionState st;
    st.k = k;
    st.nu = nu;
    st.t = t_grid;
    std::map<long long, Eigen::MatrixXcd> cache;  // propagators keyed by step
    ComplexField w = omega0k;
    double t_prev = 0;
    for (double t : t_grid) {
        double dt = t - t_prev;
        if (dt < 0) throw Error("evolve_direct: t_grid must be nondecreasing");
        if (dt > 0) {
            long long key = llround(dt * 1e12);
            auto it = cache.find(key);
            if (it == cache.end())
                it = cache.emplace(key, Eigen::MatrixXcd((dt * M).exp())).first;
            w = it->second * w;
        }
        st.omega.push_back(w);
        st.psi.push_back(Hinv * w);
        t_prev = t;
    }
    return st;
}

EvolutionState evolve_direct_stepping(const ShearProfile& profile, const Grid& grid, int k,
                                      double nu, const ComplexField& omega0k,
                                      const std::vector<double>& t_grid, double tol) {
    const int N = grid.size();
    Eigen::MatrixXcd M = mode_generator(profile, grid, k, nu);
    const Eigen::MatrixXcd& Hinv = grid.helmholtz_inverse(k);
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(N, N);

    double dt_lu = -1;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_full, lu_half;
    auto refactor = [&](double dt) {
        lu_full.compute(I - (dt / 2) * M);
        lu_half.compute(I - (dt / 4) * M);
        dt_lu = dt;
    };
    auto cn_step = [&](const ComplexField& w, double dt,
                       const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
        return ComplexField(lu.solve(w + (dt / 2) * (M * w)));
    };

    EvolutionState st;
    st.k = k;
    st.nu = nu;
    st.t = t_grid;
    ComplexField w = omega0k;
    double t = 0, dt = 1e-2;
    for (double target : t_grid) {
        while (t < target - 1e-14) {
            dt = std::min(dt, target - t);
            if (dt != dt_lu) refactor(dt);
            ComplexField full = cn_step(w, dt, lu_full);
            ComplexField half = cn_step(cn_step(w, dt / 2, lu_half), dt / 2, lu_half);
            double err = (full - half).norm() / std::max(half.norm(), 1e-300);
            if (err > tol) {
                dt /= 2;
                if (dt < 1e-12) throw StepRejection("step size underflow");
                continue;
            }
            w = half;  // second-order extrapolant kept simple: reuse the fine pass
            t += dt;
            if (err < tol / 16) dt *= 2;
        }
        st.omega.push_back(w);
        st.psi.push_back(Hinv * w);
    }
    return st;
}

// ---------------------------------------------------------------------------

ContourPlan make_contour_plan(const ShearProfile& profile, int k, double nu, double t_max,
                              double alpha) {
    ContourPlan plan;
    plan.alpha = alpha;
    plan.t_max = t_max;
    plan.lambda_max = profile.b_max() + 10;
    const double eps = nu / k;
    const double h0 = std::min(M_PI / (8.0 * k * std::max(t_max, 0.25)),
                               profile.delta0() * profile.delta0() / 8);
    const double h1 = std::min(h0, std::sqrt(eps) / 8);

    // breakpoints of the refined Sigma windows inside the global interval
    std::vector<std::pair<double, double>> seg;
    std::vector<std::pair<double, double>> sigma;
    for (int j = 0; j < 2; ++j) {
        double c = profile.critical_values()[j], hw = profile.sigma_halfwidth(j);
        sigma.push_back({c - hw, c + hw});
    }
    std::sort(sigma.begin(), sigma.end());
    double cur = -plan.lambda_max;
    for (auto [lo, hi] : sigma) {
        if (lo > cur) seg.push_back({cur, lo});
        seg.push_back({std::max(lo, cur), hi});
        cur = hi;
    }
    seg.push_back({cur, plan.lambda_max});

    for (auto [lo, hi] : seg) {
        if (hi - lo <= 0) continue;
        bool refined = false;
        for (auto [sl, sh] : sigma)
            if (lo >= sl - 1e-14 && hi <= sh + 1e-14) refined = true;
        double h = refined ? h1 : h0;
        int n = std::max(2, (int)std::ceil((hi - lo) / h));
        double hh = (hi - lo) / n;
        for (int i = 0; i <= n; ++i) {
            plan.nodes.push_back(lo + i * hh);
            plan.weights.push_back((i == 0 || i == n) ? hh / 2 : hh);
        }
    }
    return plan;
}

ContourData solve_contour_densities(const ShearProfile& profile, const Grid& grid, int k,
                                    double nu, const ComplexField& omega0k,
                                    const ContourPlan& plan) {
    ContourData data;
    data.plan = plan;
    data.omega.resize(plan.nodes.size());
    data.psi.resize(plan.nodes.size());

    // transport-model coefficients: the resolvent expands as
    // omega = sum_n (-1)^n (D^{-1} Lt)^n D^{-1} omega0 with D = i(lambda-b)-alpha,
    // u = alpha + i b, Lt = (nu/k) d^2 + i b'' Delta_k^{-1}; matching the model
    // sum_n c_n / (D - mu0)^n through lambda^{-4} leaves an O(lambda^{-5}) remainder
    const int N = grid.size();
    data.b = RealField(N);
    for (int m = 0; m < N; ++m) data.b[m] = profile.b(grid.nodes()[m]);
    data.m1 = omega0k;
    auto Lt = [&](const ComplexField& f) {
        ComplexField out = (nu / k) * grid.derivative(f, 2);
        ComplexField psi = grid.helmholtz_inverse(k) * f;
        for (int m = 0; m < N; ++m)
            out[m] += Complex(0, profile.deriv(grid.nodes()[m], 2)) * psi[m];
        return out;
    };
    ComplexField u(N);
    for (int m = 0; m < N; ++m) u[m] = Complex(plan.alpha, data.b[m]);
    auto mul = [](const ComplexField& a, const ComplexField& b) {
        return ComplexField((a.array() * b.array()).matrix());
    };
    ComplexField a1 = Lt(omega0k);          // Lt w0
    ComplexField a2 = Lt(a1);               // Lt^2 w0
    ComplexField a3 = Lt(a2);               // Lt^3 w0
    ComplexField b1 = Lt(mul(u, omega0k));  // Lt(u w0)
    ComplexField b2 = Lt(mul(u, mul(u, omega0k)));
    ComplexField e1 = Lt(mul(u, a1));  // Lt(u Lt w0)
    ComplexField e2 = Lt(b1);          // Lt^2(u w0)
    data.c2 = ComplexField(N);
    data.c3 = ComplexField(N);
    data.c4 = ComplexField(N);
    const double mu = data.mu0;
    for (int m = 0; m < N; ++m) {
        Complex w = omega0k[m], um = u[m], v = um + mu;
        // exact lambda^{-n} coefficients of the density
        Complex E3 = um * um * w - um * a1[m] - b1[m] + a2[m];
        Complex E4 = um * um * um * w - um * um * a1[m] - um * b1[m] - b2[m] +
                     um * a2[m] + e1[m] + e2[m] - a3[m];
        data.c2[m] = -mu * w - a1[m];
        data.c3[m] = E3 - v * v * w - 2.0 * v * data.c2[m];
        data.c4[m] = E4 - v * v * v * w - 3.0 * v * v * data.c2[m] - 3.0 * v * data.c3[m];
    }

    for (size_t i = 0; i < plan.nodes.size(); ++i) {
        try {
            SpectralPoint pt(plan.nodes[i], plan.alpha, nu, k);
            SpectralDensity d = spectral_density(profile, pt, grid, omega0k);
            data.omega[i] = std::move(d.omega);
            data.psi[i] = std::move(d.psi);
        } catch (const Error& e) {
            throw NodeFailure(std::string("contour node lambda=") +
                              std::to_string(plan.nodes[i]) + ": " + e.what());
        }
    }
    return data;
}

EvolutionState synthesize_contour(const Grid& grid, int k, double nu, const ContourData& data,
                                  const std::vector<double>& t_grid) {
    const ContourPlan& plan = data.plan;
    const int N = grid.size();
    EvolutionState st;
    st.k = k;
    st.nu = nu;
    st.t = t_grid;

    // model-subtracted remainders r_i = omega_i - m1/D - c2/D^2 with
    // D = i(lambda_i - b) - alpha - mu0; the model synthesizes exactly by
    // residues and r decays like lambda^{-3}
    std::vector<ComplexField> r(plan.nodes.size());
    for (size_t i = 0; i < plan.nodes.size(); ++i) {
        r[i] = data.omega[i];
        for (int m = 0; m < N; ++m) {
            Complex D(-plan.alpha - data.mu0, plan.nodes[i] - data.b[m]);
            Complex D2 = D * D;
            r[i][m] -= data.m1[m] / D + data.c2[m] / D2 + data.c3[m] / (D2 * D) +
                       data.c4[m] / (D2 * D2);
        }
    }

    // tail constant from the fitted decay at the contour ends
    double c_tail = 0;
    for (size_t i = 0; i < plan.nodes.size(); ++i) {
        double l = std::abs(plan.nodes[i]);
        if (l > 0.9 * plan.lambda_max)
            c_tail = std::max(c_tail, r[i].cwiseAbs().maxCoeff() * (1 + l * l));
    }

    const Eigen::MatrixXcd& Hinv = grid.helmholtz_inverse(k);
    for (double t : t_grid) {
        ComplexField w = ComplexField::Zero(N);
        for (size_t i = 0; i < plan.nodes.size(); ++i)
            w += std::exp(Complex(0, -k * plan.nodes[i] * t)) * plan.weights[i] * r[i];
        double pre = std::exp(plan.alpha * k * t - nu * k * k * t) / (2 * M_PI);
        w = -pre * w;
        // residue contribution of the model at lambda = b(y) - i(alpha + mu0)
        double damp = std::exp(-nu * k * k * t - data.mu0 * k * t), kt = k * t;
        for (int m = 0; m < N; ++m)
            w[m] += damp * std::exp(Complex(0, -k * data.b[m] * t)) *
                    (data.m1[m] - kt * data.c2[m] + kt * kt / 2 * data.c3[m] -
                     kt * kt * kt / 6 * data.c4[m]);
        st.omega.push_back(w);
        st.psi.push_back(Hinv * w);
        double tail = 2 * pre * c_tail /
                      (plan.lambda_max * (1 + k * t * plan.lambda_max));
        st.tail_estimate = std::max(st.tail_estimate, tail);
    }
    double max_norm = 0;
    for (const auto& w : st.omega) max_norm = std::max(max_norm, w.norm());
    if (max_norm > 0 && st.tail_estimate > 1e-5 * max_norm)
        throw TailTooLarge("estimated contour tail exceeds 1e-5 of the synthesized norm");
    return st;
}

EvolutionState evolve_contour(const ShearProfile& profile, const Grid& grid, int k, double nu,
                              const ComplexField& omega0k, const ContourPlan& plan,
                              const std::vector<double>& t_grid, ContourData* keep_data) {
    ContourData data = solve_contour_densities(profile, grid, k, nu, omega0k, plan);
    EvolutionState st = synthesize_contour(grid, k, nu, data, t_grid);
    if (keep_data) *keep_data = std::move(data);
    return st;
}

SplitFields split_local_nonlocal(const ShearProfile& profile, const Grid& grid, int k,
                                 double nu, const ContourData& data, double t,
                                 double c_split) {
    const ContourPlan& plan = data.plan;
    const int N = grid.size();
    SplitFields out;
    out.omega_loc = out.omega_nloc = ComplexField::Zero(N);
    out.psi_loc = out.psi_nloc = ComplexField::Zero(N);

    RealField radius(N);
    for (int m = 0; m < N; ++m) {
        double b = profile.b(grid.nodes()[m]);
        double md = std::min(std::abs(b - profile.critical_values()[0]),
                             std::abs(b - profile.critical_values()[1]));
        radius[m] = c_split * (md + std::sqrt(nu / k));
    }
    double pre = std::exp(plan.alpha * k * t - nu * k * k * t) / (2 * M_PI);
    for (size_t i = 0; i < plan.nodes.size(); ++i) {
        Complex phase = -pre * std::exp(Complex(0, -k * plan.nodes[i] * t)) * plan.weights[i];
        for (int m = 0; m < N; ++m) {
            Complex D(-plan.alpha - data.mu0, plan.nodes[i] - data.b[m]);
            Complex D2 = D * D;
            Complex rim = data.omega[i][m] - data.m1[m] / D - data.c2[m] / D2 -
                          data.c3[m] / (D2 * D) - data.c4[m] / (D2 * D2);
            bool local = std::abs(plan.nodes[i] - profile.b(grid.nodes()[m])) < radius[m];
            (local ? out.omega_loc : out.omega_nloc)[m] += phase * rim;
        }
    }
    // the model residue sits at lambda = b(y), inside every local window
    double damp = std::exp(-nu * k * k * t - data.mu0 * k * t), kt = k * t;
    for (int m = 0; m < N; ++m)
        out.omega_loc[m] += damp * std::exp(Complex(0, -k * data.b[m] * t)) *
                            (data.m1[m] - kt * data.c2[m] + kt * kt / 2 * data.c3[m] -
                             kt * kt * kt / 6 * data.c4[m]);
    const Eigen::MatrixXcd& Hinv = grid.helmholtz_inverse(k);
    out.psi_loc = Hinv * out.omega_loc;
    out.psi_nloc = Hinv * out.omega_nloc;
    return out;
}

PhysicalFields synthesize_xy(const Grid& grid, const std::vector<int>& ks,
                             const std::vector<ComplexField>& omega_k,
                             const std::vector<ComplexField>& psi_k,
                             const std::vector<double>& x_grid) {
    const int N = grid.size();
    const int NX = (int)x_grid.size();
    PhysicalFields f;
    f.omega = Eigen::MatrixXd::Zero(NX, N);
    f.ux = Eigen::MatrixXd::Zero(NX, N);
    f.uy = Eigen::MatrixXd::Zero(NX, N);
    for (size_t q = 0; q < ks.size(); ++q) {
        int k = ks[q];
        ComplexField ux = velocity_x(grid, psi_k[q]);
        ComplexField uy = velocity_y(k, psi_k[q]);
        for (int ix = 0; ix < NX; ++ix) {
            Complex e = std::exp(Complex(0, k * x_grid[ix]));
            for (int m = 0; m < N; ++m) {
                f.omega(ix, m) += 2 * std::real(e * omega_k[q][m]);
                f.ux(ix, m) += 2 * std::real(e * ux[m]);
                f.uy(ix, m) += 2 * std::real(e * uy[m]);
            }
        }
    }
    return f;
}

}  // namespace oscar
