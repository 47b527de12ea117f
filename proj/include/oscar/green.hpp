#pragma once

#include <memory>

#include "oscar/profile.hpp"

namespace oscar {

/// Periodic Helmholtz Green's function (k^2 - d^2/dy^2) G_k = delta, closed
/// form in the periodic distance. The derived kernel F_k(y,z) =
/// dz dy G_k - delta(y-z) is kept as a smooth part plus a tracked delta
/// coefficient; the delta is never discretized.
struct StandardGreen {
    int k;
    double p;

    double G(double y, double z) const;
    /// dG/dy (signed; jump across y = z handled by the smooth branches).
    double dG_dy(double y, double z) const;
    /// Smooth part of dz dy G, equal to -k^2 G. The delta coefficient of
    /// dz dy G is +1, so F = smooth part exactly.
    double F(double y, double z) const { return -double(k) * k * G(y, z); }
    static constexpr double delta_coefficient = 1.0;

    Eigen::MatrixXd matrix(const Grid& grid) const;
};

StandardGreen green_standard(int k, double p);

/// Fitted constant for |G| + |dG|/k <= (C/k) e^{-k d(y,z)} sampled off the
/// diagonal.
double fit_standard_envelope(const StandardGreen& g, const Grid& grid);

/// Helmholtz Green's function with the truncated critical-layer potential:
/// (k^2 - d^2 + V) GG = delta, V = b''/(b - lambda - i alpha) *
/// [phi0((y-y_j*)/delta0) - phi0((y-y_j*)/delta(Lambda))].
struct ModifiedGreen {
    std::shared_ptr<const Grid> grid;
    int k = 1;
    int j = 0;
    ComplexField V;
    Eigen::MatrixXcd G;       // columns solve against unit impulses
    double residual_max = 0;  // max column residual of (k^2 - d^2 + V)
    double asymmetry = 0;     // ||G - G^T||_max / ||G||_max
    double re_v_min = 0;      // min Re V on the grid
};

/// Assemble and solve with an explicitly supplied potential (test overrides
/// use V = 0).
ModifiedGreen assemble_modified_green(std::shared_ptr<const Grid> grid, int k,
                                      const ComplexField& V, int j = 0);

/// Potential of (mGk1)-type on the grid nodes; nodes within 1e-10 of a real
/// crossing of b = lambda are evaluated at a half-cell offset.
ComplexField critical_layer_potential(const ShearProfile& profile, const SpectralPoint& point,
                                      const ParamGeometry& geometry, const Grid& grid, int j);

/// Full pipeline: potential from (profile, point, geometry), then the solve.
/// Throws DeltaTooLarge when delta(Lambda) > p/8 unless force is set.
ModifiedGreen green_modified(const ShearProfile& profile, const SpectralPoint& point,
                             const ParamGeometry& geometry, const Grid& grid, int j,
                             bool force = false);

/// H(y,z) = [d_z + phi0((y-y_j*)/(10 delta)) d_y] GG, spectral differentiation
/// in each index.
Eigen::MatrixXcd h_kernel(const ModifiedGreen& mg, const ShearProfile& profile,
                          const ParamGeometry& geometry);

struct GreenEnvelopeFit {
    double C_g0;    // beta = 0 bound
    double C_g1;    // beta = 1 bound
    double C_h;     // H bound, z restricted to S^j_{4 delta}
    double C_sum;   // (d_y + d_z) GG bound
};

/// Sup-ratio constants for the weighted envelopes of the modified Green's
/// function and its derivative kernels.
GreenEnvelopeFit fit_modified_envelope(const ModifiedGreen& mg, const ShearProfile& profile,
                                       const ParamGeometry& geometry, const WeightField& w);

/// Integral-bound constants: sup_y k^{3/2-beta} ||d^beta G(y,.)||_L2 and
/// sup_y k^{-1/2-beta} ||d^beta F(y,.)||_L2 (smooth part), beta in {0,1}.
struct IntegralBoundFit {
    double C_g0, C_g1, C_f0, C_f1;
};

IntegralBoundFit fit_integral_bounds(const StandardGreen& g, const Grid& grid);

}  // namespace oscar
