#pragma once

#include <memory>
#include <vector>

#include "oscar/profile.hpp"

namespace oscar {

/// The generalized Airy operator A = (nu/k) d^2/dy^2 + i(lambda - b(y)) - alpha.
ComplexField apply_A(const ShearProfile& profile, const SpectralPoint& point, const Grid& grid,
                     const ComplexField& field);

/// Caches the dense factorization of A so kernel columns and repeated solves
/// share one LU.
class AirySolver {
public:
    AirySolver(std::shared_ptr<const Grid> grid, const ShearProfile& profile,
               const SpectralPoint& point, double sigma0 = 0.05);

    const Grid& grid() const { return *grid_; }
    const SpectralPoint& point() const { return point_; }
    ComplexField solve(const ComplexField& rhs) const;
    /// Dense A^{-1}; the fundamental-solution matrix is inverse()/h.
    const Eigen::MatrixXcd& inverse() const;
    const Eigen::MatrixXcd& matrix() const { return op_->dense(); }

private:
    std::shared_ptr<const Grid> grid_;
    SpectralPoint point_;
    std::shared_ptr<PeriodicOperator> op_;
    mutable std::shared_ptr<Eigen::MatrixXcd> inv_;
    mutable std::mutex mutex_;
};

ComplexField solve_A(const ShearProfile& profile, const SpectralPoint& point, const Grid& grid,
                     const ComplexField& rhs, double sigma0 = 0.05);

/// Fundamental-solution matrix K[m][n] ~ k(y_m, z_n); each column solves
/// A k(.,z_n) = delta(.-z_n).
Eigen::MatrixXcd airy_kernel(const ShearProfile& profile, const SpectralPoint& point,
                             const Grid& grid, double sigma0 = 0.05);

/// Regime-dependent length scales L_j(y) and the nondegenerate L(y).
struct AiryScale {
    RealField L_j;   // per (ake3)/(ake3.1)
    RealField L;     // per (ake5)
    double c0 = 0.25;      // envelope decay rate (fitted or configured)
    double sigma0 = 0.05;  // admissible alpha shift
};

AiryScale airy_scale(const ShearProfile& profile, const SpectralPoint& point, const Grid& grid,
                     int j);

/// Right side of the kernel envelope for the given regime, with C = 1 and the
/// supplied decay rate c0; pure arithmetic.
Eigen::MatrixXd envelope(const ShearProfile& profile, const SpectralPoint& point,
                         const ParamGeometry& geometry, const Grid& grid, double c0);

struct EnvelopeFit {
    double C;        // max |K| / E over the fitted band
    double c0;       // decay rate from the log-linear fit
    double r2;       // regression quality
};

/// Least-squares fit of log|K| against the envelope shape on the off-diagonal
/// band; constants are fitted, never assumed.
EnvelopeFit fit_envelope(const Eigen::MatrixXcd& K, const ShearProfile& profile,
                         const SpectralPoint& point, const ParamGeometry& geometry,
                         const Grid& grid);

/// Special function W(y) = -int_{-inf}^0 e^{i y xi} exp(xi^3/3 + c xi) dxi.
struct WFunction {
    double c;
    std::vector<Complex> values;
    Complex w0;  // W(0)
};

Complex w_special_point(double c, double y, double abs_tol = 1e-10);
WFunction w_special(double c, const std::vector<double>& y_samples, double sigma0 = 0.05);

struct SingularDecomposition {
    ComplexField w1, w2;
    ComplexField model;           // the explicit term of the two-crossing model
    double y_plus, y_minus;       // roots of b = lambda around y_j*
    double model_residual_sup;    // sup |w2 - model| over the cutoff support
};

/// Split A^{-1}h into a smooth remainder w1 and the W-built singular part w2
/// near the two crossing points of b = lambda.
SingularDecomposition singular_decomposition(const ShearProfile& profile,
                                             const SpectralPoint& point, const Grid& grid,
                                             const ComplexField& h, int j,
                                             double sigma0 = 0.05);

/// Roots of b - lambda on the two monotone branches adjacent to y_j*.
std::pair<double, double> crossing_points(const ShearProfile& profile, double lambda, int j);

}  // namespace oscar
