#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <memory>
#include <mutex>
#include <map>

#include "oscar/errors.hpp"

namespace oscar {

using Complex = std::complex<double>;
using ComplexField = Eigen::VectorXcd;
using RealField = Eigen::VectorXd;

/// Uniform periodic grid on the circle of circumference p, with spectral
/// differentiation and the Fourier-diagonal operators shared by all modules.
class Grid {
public:
    Grid(int N, double period);

    int size() const { return N_; }
    double period() const { return p_; }
    double spacing() const { return h_; }
    const RealField& nodes() const { return nodes_; }
    /// Wavenumbers in FFT bin order: ell[m] = (2*pi/p)*m for m < N/2, else (m-N).
    const RealField& wavenumbers() const { return ell_; }

    /// Geodesic distance on the circle.
    double periodic_distance(double y, double z) const;
    int nearest_node(double y) const;
    /// Unit impulse of height 1/h at the node nearest z.
    ComplexField impulse(double z) const;

    ComplexField to_spectral(const ComplexField& v) const;
    ComplexField from_spectral(const ComplexField& c) const;

    /// Spectral derivative, order 1 or 2 (fourier_diff).
    ComplexField derivative(const ComplexField& v, int order) const;

    /// Solve (d^2/dy^2 - k^2) psi = omega diagonally in Fourier space.
    ComplexField invert_helmholtz(const ComplexField& omega, int k) const;

    /// Dense circulant matrices of the Fourier-diagonal operators.
    const Eigen::MatrixXcd& diff1() const { return D1_; }
    const Eigen::MatrixXcd& diff2() const { return D2_; }
    /// Dense matrix of (d^2/dy^2 - k^2)^{-1}; cached per k.
    const Eigen::MatrixXcd& helmholtz_inverse(int k) const;

    /// Dense circulant matrix with Fourier symbol s (bin order).
    Eigen::MatrixXcd circulant(const ComplexField& symbol) const;

    /// Resolution rule: N >= points_per_scale * p / ell_min, rounded to even.
    static int recommended_size(double period, double ell_min, int points_per_scale = 32);

private:
    int N_;
    double p_, h_;
    RealField nodes_, ell_;
    Eigen::MatrixXcd D1_, D2_;
    mutable std::map<int, Eigen::MatrixXcd> hinv_cache_;
    mutable std::mutex cache_mutex_;
};

/// c2(y) d^2/dy^2 + c0(y) assembled either as a dense spectral matrix or as a
/// 6th-order cyclic-banded stencil.
class PeriodicOperator {
public:
    enum class Assembly { SpectralDense, Stencil6 };

    PeriodicOperator(std::shared_ptr<const Grid> grid, ComplexField c2, ComplexField c0,
                     Assembly assembly = Assembly::SpectralDense);

    const Grid& grid() const { return *grid_; }
    Assembly assembly() const { return assembly_; }
    ComplexField apply(const ComplexField& v) const;
    const Eigen::MatrixXcd& dense() const;

    /// Solve op*x = rhs. Throws NearSingular when the reciprocal condition
    /// estimate falls below 1e-14 (an eigenvalue collision upstream).
    ComplexField solve(const ComplexField& rhs) const;

private:
    std::shared_ptr<const Grid> grid_;
    ComplexField c2_, c0_;
    Assembly assembly_;
    Eigen::MatrixXcd dense_;
    mutable std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXcd>> lu_;
    mutable std::shared_ptr<void> sparse_lu_;  // SparseLU, type-erased
    Eigen::SparseMatrix<Complex> sparse_;
    mutable std::mutex mutex_;
    void factorize() const;
};

ComplexField solve_periodic(const PeriodicOperator& op, const ComplexField& rhs);

}  // namespace oscar
