#pragma once

#include <optional>
#include <vector>

#include "oscar/resolvent.hpp"

namespace oscar {

/// Per-mode trajectory: omega_k(t,.) and psi_k(t,.) at the requested times.
struct EvolutionState {
    int k = 1;
    double nu = 0;
    std::vector<double> t;
    std::vector<ComplexField> omega;
    std::vector<ComplexField> psi;
    double tail_estimate = 0;  // contour route only
};

ComplexField velocity_x(const Grid& grid, const ComplexField& psi);
ComplexField velocity_y(int k, const ComplexField& psi);

/// Direct integration of the mode equation by dense matrix-exponential action
/// (N <= 1024) or adaptive Crank-Nicolson stepping.
EvolutionState evolve_direct(const ShearProfile& profile, const Grid& grid, int k, double nu,
                             const ComplexField& omega0k, const std::vector<double>& t_grid);

/// Adaptive implicit route, exposed for overlap tests against the exponential.
EvolutionState evolve_direct_stepping(const ShearProfile& profile, const Grid& grid, int k,
                                      double nu, const ComplexField& omega0k,
                                      const std::vector<double>& t_grid, double tol = 1e-8);

struct ContourPlan {
    double alpha = 0;
    double t_max = 1;
    double lambda_max = 0;
    std::vector<double> nodes;
    std::vector<double> weights;  // composite trapezoid
};

/// Node spacing pi/(8 k t_max) globally, refined to sqrt(eps)/8 inside each
/// Sigma_{j,delta0}; |lambda| <= max|b| + 10.
ContourPlan make_contour_plan(const ShearProfile& profile, int k, double nu, double t_max,
                              double alpha);

/// Spectral densities at every plan node (kept for local/nonlocal splits),
/// plus the two-term transport model omega ~ m1/D + c2/D^2 with
/// D = i(lambda - b(y)) - alpha - mu0 that is synthesized by residues; only
/// the O(lambda^{-3}) remainder goes through the quadrature.
struct ContourData {
    ContourPlan plan;
    std::vector<ComplexField> omega;
    std::vector<ComplexField> psi;
    RealField b;                  // profile samples on the grid
    ComplexField m1, c2, c3, c4;  // model coefficients, remainder is O(lambda^{-5})
    double mu0 = 1.0;             // artificial pole depth, keeps D regular at alpha = 0
};

ContourData solve_contour_densities(const ShearProfile& profile, const Grid& grid, int k,
                                    double nu, const ComplexField& omega0k,
                                    const ContourPlan& plan);

/// omega_k(t,y) = -(1/2pi) e^{alpha k t} e^{-nu k^2 t} sum w_i e^{-i k l_i t}
/// omega(y, l_i); throws TailTooLarge when the fitted <lambda>^{-2} tail
/// exceeds 1e-5 of the synthesized norm.
EvolutionState synthesize_contour(const Grid& grid, int k, double nu, const ContourData& data,
                                  const std::vector<double>& t_grid);

EvolutionState evolve_contour(const ShearProfile& profile, const Grid& grid, int k, double nu,
                              const ComplexField& omega0k, const ContourPlan& plan,
                              const std::vector<double>& t_grid,
                              ContourData* keep_data = nullptr);

/// Partition of the contour integral at time t by the indicator
/// |lambda - b(y)| < c_split (min_j |b(y)-b(y_j*)| + sqrt(nu/k)); local +
/// nonlocal equals the full synthesis exactly (same quadrature nodes).
struct SplitFields {
    ComplexField omega_loc, omega_nloc;
    ComplexField psi_loc, psi_nloc;
};

SplitFields split_local_nonlocal(const ShearProfile& profile, const Grid& grid, int k,
                                 double nu, const ContourData& data, double t,
                                 double c_split = 0.25);

/// Physical-space synthesis over x: f(x,y) = 2 Re sum_k e^{ikx} f_k(y);
/// u = (-(d/dy) psi, (d/dx) psi).
struct PhysicalFields {
    Eigen::MatrixXd omega, ux, uy;  // rows: x nodes, cols: y nodes
};

PhysicalFields synthesize_xy(const Grid& grid, const std::vector<int>& ks,
                             const std::vector<ComplexField>& omega_k,
                             const std::vector<ComplexField>& psi_k,
                             const std::vector<double>& x_grid);

}  // namespace oscar
