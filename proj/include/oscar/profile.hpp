#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "oscar/grid.hpp"

namespace oscar {

struct ProfileSpec {
    std::string family = "kolmogorov";    // "kolmogorov" | "table"
    double period = 8.0;
    std::vector<double> samples;          // table family: b at uniform nodes
};

/// Background shear flow b(y) on the circle, its derivatives up to order 4,
/// and the critical structure (exactly two non-degenerate critical points).
class ShearProfile {
public:
    using Evaluator = std::function<double(double, int)>;  // (y, derivative order)

    double period() const { return period_; }
    double b(double y) const { return eval_(y, 0); }
    double deriv(double y, int order) const { return eval_(y, order); }

    const std::array<double, 2>& critical_points() const { return y_star_; }
    const std::array<double, 2>& critical_values() const { return b_star_; }
    const std::array<double, 2>& critical_curvatures() const { return bpp_star_; }

    double kappa() const { return kappa_; }
    double delta0() const { return delta0_; }
    double c4_norm() const { return c4_norm_; }
    double b_max() const { return b_max_; }

    /// Half-width of Sigma_{j,delta0}: |b''(y_j*)| * delta0^2 / 16.
    double sigma_halfwidth(int j) const;
    bool in_sigma(double lambda, int j) const;
    /// j minimizing |lambda - b(y_j*)| (0-based).
    int nearest_critical(double lambda) const;

    double periodic_distance(double y, double z) const;

    /// Raw construction for synthetic test profiles; skips invariant checks.
    static ShearProfile unchecked(double period, Evaluator eval,
                                  std::array<double, 2> y_star = {0, 0},
                                  std::array<double, 2> b_star = {0, 0},
                                  std::array<double, 2> bpp_star = {1, 1});

    friend ShearProfile build_profile(const ProfileSpec& spec);

private:
    ShearProfile() = default;
    double period_ = 0;
    Evaluator eval_;
    std::array<double, 2> y_star_{}, b_star_{}, bpp_star_{};
    double kappa_ = 0, delta0_ = 0, c4_norm_ = 0, b_max_ = 0;
};

ShearProfile build_profile(const ProfileSpec& spec);

/// Parameter bundle Theta = (lambda, alpha, nu, k) with eps = nu/k.
struct SpectralPoint {
    double lambda;
    double alpha;
    double nu;
    int k;
    double sigma_sharp = 0.02;

    SpectralPoint(double lambda, double alpha, double nu, int k, double sigma_sharp = 0.02);
    double epsilon() const { return nu / k; }
};

enum class Regime { Nondegenerate, AlphaDominated, Intermediate, Viscous };

const char* regime_name(Regime r);

struct ParamGeometry {
    double delta;       // delta(Lambda)
    double delta1;      // 8 min_j sqrt(|lambda - b*|/|b''*|)
    double delta2;      // delta1 / 64
    double c_dagger;
    std::array<bool, 2> sigma_member;
    Regime regime;
    double beta;        // min_j |b*-lambda| ~ eps^{2 beta}, in [0, 1/4]
    double min_crit_dist;  // min_j |lambda - b(y_j*)|
};

/// Thresholds for the deterministic regime classification.
struct GeometryConfig {
    double c_dagger = 10.0;
    double m_visc = 4.0;
};

ParamGeometry param_geometry(const ShearProfile& profile, const SpectralPoint& point,
                             const GeometryConfig& cfg = {});

struct WeightField {
    RealField rho_j;     // |y - y_j*| + delta
    RealField rho_jk;    // min(rho_j, 1/k)
    double d_jk;         // min(delta, 1/k)
    double s_lo, s_hi;   // interval S^j_d = [y_j* - d, y_j* + d]
};

WeightField weights(const ShearProfile& profile, const ParamGeometry& geometry, int j,
                    const Grid& grid, int k, bool override_delta_check = false);

}  // namespace oscar
