#pragma once

#include <optional>
#include <vector>

#include "oscar/airy.hpp"
#include "oscar/green.hpp"

namespace oscar {

/// Dense matrix of L_{k,nu} g = (nu/k) g'' - i b g + i b'' Dk^{-1} g; omit nu
/// for the inviscid Rayleigh operator.
Eigen::MatrixXcd assemble_Lk(const ShearProfile& profile, const Grid& grid, int k,
                             std::optional<double> nu);

/// Orr-Sommerfeld spectral density at Lambda = lambda + i alpha, with the
/// modified density psi* and its source f_{0k}.
struct SpectralDensity {
    ComplexField omega, psi, psi_star, omega_star, f0k;
    double M_k = 0;           // ||omega_0k||_{H^3_k}
    double residual = 0;      // ||A omega + i b'' psi - omega_0k||_inf
};

SpectralDensity spectral_density(const ShearProfile& profile, const SpectralPoint& point,
                                 const Grid& grid, const ComplexField& omega0k);

/// Sobolev norm ||g||_{H^m_k}^2 = sum_j k^{2(m-j)} ||d^j g||_2^2.
double hk_norm(const Grid& grid, const ComplexField& g, int k, int m);

/// The limiting-absorption operator. Nondegenerate: T = Dk^{-1} A^{-1}(i b''.).
/// Degenerate: the modified-Green form together with its four pieces.
struct TOperator {
    Eigen::MatrixXcd T;
    bool degenerate = false;
    int j = 0;
    Eigen::MatrixXcd T_I1, T_I2, T_v1, T_v2;  // degenerate regime only
    double decomposition_error = 0;            // ||T + iT_I1 + iT_I2 + iT_v1 + T_v2||_max
};

TOperator assemble_T(const ShearProfile& profile, const SpectralPoint& point,
                     const ParamGeometry& geometry, const Grid& grid,
                     std::optional<int> force_degenerate_j = std::nullopt);

struct WeightedNormSpec {
    double sigma1 = 0;
    double sigma2 = -15.0 / 8.0;
    double gamma = 15.0 / 8.0;
    int j = 0;
};

/// The three exponent pairs admitted for a given gamma.
std::array<std::pair<double, double>, 3> admissible_exponents(double gamma);

/// Mixed L2/Linf weighted norm: L2 block on S^j_delta with
/// delta^{-1/2+sigma1} (delta ^ 1/k)^{sigma2+beta} scaling, Linf complement
/// with rho_j^{sigma1} rho_{jk}^{sigma2+beta}, beta in {0,1}.
double weighted_norm(const Grid& grid, const ComplexField& g, const WeightedNormSpec& spec,
                     const WeightField& w, const ParamGeometry& geometry, int k);

struct LapRow {
    double lambda;
    bool degenerate;
    double kappa2;
    double kappa_mixed;
    double t_norm;                 // estimated operator norm of T
    std::array<double, 4> pieces;  // estimated norms of I1, I2, v1, v2 (degenerate)
};

struct LapReport {
    std::vector<LapRow> rows;
    double sigma_sharp;
    double kappa_min = 0;
};

/// kappa = min ||(I+T)g|| / ||g||: smallest generalized singular value for the
/// quadratic surrogate, then the true mixed norm evaluated over the candidate
/// subspace.
LapRow lap_constant(const ShearProfile& profile, const SpectralPoint& point,
                    const ParamGeometry& geometry, const Grid& grid,
                    const WeightedNormSpec& spec,
                    std::optional<int> force_degenerate_j = std::nullopt);

/// Estimated operator norm of a dense matrix under the mixed weighted norm,
/// by randomized probing (deterministic seed).
double weighted_operator_norm(const Grid& grid, const Eigen::MatrixXcd& T,
                              const WeightedNormSpec& spec, const WeightField& w,
                              const ParamGeometry& geometry, int k, int probes = 48);

/// Good derivative D_lambda = d_lambda + a(y, lambda) d_y with
/// a = [1-phi0((y-y_1*)/delta2)][1-phi0((y-y_2*)/delta2)] / b'(y); falls back
/// to plain d_lambda off the active branch.
struct LambdaDerivative {
    ComplexField d1;
    ComplexField d2;   // set when enough samples; see StencilOutOfRange
    RealField a;
    bool partial_only = false;  // plain d_lambda branch
    bool has_d2 = false;
};

RealField good_derivative_coefficient(const ShearProfile& profile, double lambda,
                                      const Grid& grid);

/// samples[i] = psi*(., lambda_grid[i]) on a uniform lambda grid; derivative
/// evaluated at the center node. Needs >= 5 samples for d1, >= 9 for d2.
LambdaDerivative good_derivative(const std::vector<ComplexField>& samples,
                                 const std::vector<double>& lambda_grid,
                                 const ShearProfile& profile, const SpectralPoint& point,
                                 const Grid& grid);

struct EmbeddedScanRow {
    double lambda;
    double smin;
};

struct EmbeddedScan {
    std::vector<EmbeddedScanRow> rows;
    std::vector<Complex> rayleigh_spectrum;  // eigenvalues of inviscid i L_k
    double floor = 0;                        // min smin over the scan
};

/// Principal-value Rayleigh operator scan for generalized embedded
/// eigenvalues: (k^2 - d^2) + P.V. b''/(b - lambda) + i pi sum b''/|b'| delta.
EmbeddedScan embedded_eigenvalue_scan(const ShearProfile& profile, const Grid& grid, int k,
                                      const std::vector<double>& lambda_grid);

/// Largest C-dagger from a descending grid that keeps delta(Lambda) <= p/8
/// over Sigma_{j,delta0} and ||T_v1|| + ||T_v2|| <= 1/2 on X^{0,-gamma}.
double calibrate_c_dagger(const ShearProfile& profile, const Grid& grid, int k, double nu,
                          double gamma);

}  // namespace oscar
