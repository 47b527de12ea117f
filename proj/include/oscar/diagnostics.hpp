#pragma once

#include <string>
#include <vector>

#include "oscar/evolution.hpp"

namespace oscar {

struct RateFit {
    std::string quantity;
    double t_lo = 0, t_hi = 0;
    double exponent = 0;   // power-law fits
    double rate = 0;       // exponential fits
    double uncertainty = 0;  // half-width of the 95% bootstrap band
    double r2 = 0;
    bool exponential = false;
};

/// Log-log least squares of v ~ A t^p on [t_lo, t_hi]; uncertainty from 200
/// bootstrap resamples.
RateFit fit_power_law(const std::vector<double>& t, const std::vector<double>& v,
                      double t_lo, double t_hi, unsigned seed = 7);

/// Semilog least squares of v ~ A e^{-r t}; reports r (positive = decay).
RateFit fit_exponential(const std::vector<double>& t, const std::vector<double>& v,
                        double t_lo, double t_hi, unsigned seed = 7);

struct RateSpec {
    double t_min = 2;
    double t_lo = 5, t_hi = 50;
    double gamma = 15.0 / 8.0;
    double sigma_sharp = 0.02;
    unsigned seed = 7;
};

/// The Theorem-facing quantities: sup|u^x| (target -1), weighted sup|psi|
/// (target -2), and the compensated enstrophy rate for enhanced dissipation.
std::vector<RateFit> fit_rates(const EvolutionState& state, const Grid& grid,
                               const ShearProfile& profile, const RateSpec& spec);

struct DepletionProfile {
    std::vector<double> nu;
    std::vector<double> plateau;  // normalized by M_k
    double slope = 0;             // d log(plateau) / d log(nu)
    double slope_err = 0;
    double gamma = 15.0 / 8.0;
};

/// Late-time plateau of |omega_k(t, y_j*)| per nu; throws NoPlateaus when the
/// half-window medians still drift by more than 30%.
DepletionProfile depletion_profile(const std::vector<EvolutionState>& runs,
                                   const std::vector<double>& nus, const Grid& grid,
                                   const ShearProfile& profile, int j, double gamma,
                                   double m_k);

struct RunManifest {
    std::string config_snapshot;
    std::string profile_hash;
    int grid_n = 0;
    double grid_period = 0;
    double c_dagger = 0, sigma_sharp = 0, sigma0 = 0;
    double wall_seconds = 0;
    std::string version = "oscar 0.1.0";
    std::vector<std::pair<std::string, std::uint64_t>> artifacts;  // path, checksum

    std::string to_json() const;
    void write(const std::string& path) const;
};

}  // namespace oscar
