#include "oscar/grid.hpp"

#include <Eigen/SparseLU>
#include <unsupported/Eigen/FFT>
#include <cmath>
#include <random>

namespace oscar {

Grid::Grid(int N, double period) : N_(N), p_(period), h_(period / N) {
    if (N <= 0 || N % 2 != 0) throw Error("Grid: N must be positive and even");
    if (period <= 0) throw Error("Grid: period must be positive");
    nodes_.resize(N);
    ell_.resize(N);
    const double dl = 2.0 * M_PI / p_;
    for (int m = 0; m < N; ++m) {
        nodes_[m] = m * h_;
        int freq = (m < N / 2) ? m : m - N;
        ell_[m] = dl * freq;
    }
    // first derivative zeroes the Nyquist bin; second keeps it (real symbol)
    ComplexField s1(N), s2(N);
    for (int m = 0; m < N; ++m) {
        s1[m] = (m == N / 2) ? Complex(0, 0) : Complex(0, ell_[m]);
        s2[m] = Complex(-ell_[m] * ell_[m], 0);
    }
    D1_ = circulant(s1);
    D2_ = circulant(s2);
}

double Grid::periodic_distance(double y, double z) const {
    double d = std::fmod(std::abs(y - z), p_);
    return std::min(d, p_ - d);
}

int Grid::nearest_node(double y) const {
    double u = std::fmod(y / h_, (double)N_);
    if (u < 0) u += N_;
    int n = (int)std::lround(u);
    return n % N_;
}

ComplexField Grid::impulse(double z) const {
    ComplexField v = ComplexField::Zero(N_);
    v[nearest_node(z)] = 1.0 / h_;
    return v;
}

ComplexField Grid::to_spectral(const ComplexField& v) const {
    Eigen::FFT<double> fft;
    std::vector<Complex> in(v.data(), v.data() + N_), out(N_);
    fft.fwd(out, in);
    ComplexField c(N_);
    for (int m = 0; m < N_; ++m) c[m] = out[m] / (double)N_;
    return c;
}

ComplexField Grid::from_spectral(const ComplexField& c) const {
    Eigen::FFT<double> fft;
    std::vector<Complex> in(N_), out(N_);
    for (int m = 0; m < N_; ++m) in[m] = c[m] * (double)N_;
    fft.inv(out, in);
    ComplexField v(N_);
    for (int m = 0; m < N_; ++m) v[m] = out[m];
    return v;
}

ComplexField Grid::derivative(const ComplexField& v, int order) const {
    if (order != 1 && order != 2) throw Error("derivative: order must be 1 or 2");
    ComplexField c = to_spectral(v);
    for (int m = 0; m < N_; ++m) {
        if (order == 1) {
            c[m] *= (m == N_ / 2) ? Complex(0, 0) : Complex(0, ell_[m]);
        } else {
            c[m] *= -ell_[m] * ell_[m];
        }
    }
    return from_spectral(c);
}

ComplexField Grid::invert_helmholtz(const ComplexField& omega, int k) const {
    if (k == 0) throw ZeroMode("invert_helmholtz requires k != 0");
    ComplexField c = to_spectral(omega);
    for (int m = 0; m < N_; ++m) c[m] /= -(ell_[m] * ell_[m] + (double)k * k);
    return from_spectral(c);
}

Eigen::MatrixXcd Grid::circulant(const ComplexField& symbol) const {
    // first column of IF * diag(symbol) * F
    Eigen::FFT<double> fft;
    std::vector<Complex> in(symbol.data(), symbol.data() + N_), col(N_);
    fft.inv(col, in);
    Eigen::MatrixXcd C(N_, N_);
    for (int a = 0; a < N_; ++a)
        for (int b = 0; b < N_; ++b) C(a, b) = col[(a - b + N_) % N_];
    return C;
}

const Eigen::MatrixXcd& Grid::helmholtz_inverse(int k) const {
    if (k == 0) throw ZeroMode("helmholtz_inverse requires k != 0");
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = hinv_cache_.find(k);
    if (it != hinv_cache_.end()) return it->second;
    ComplexField s(N_);
    for (int m = 0; m < N_; ++m) s[m] = -1.0 / (ell_[m] * ell_[m] + (double)k * k);
    auto [jt, ok] = hinv_cache_.emplace(k, circulant(s));
    return jt->second;
}

int Grid::recommended_size(double period, double ell_min, int points_per_scale) {
    int n = (int)std::ceil(points_per_scale * period / ell_min);
    if (n % 2) ++n;
    return std::max(n, 16);
}

// ---------------------------------------------------------------------------

PeriodicOperator::PeriodicOperator(std::shared_ptr<const Grid> grid, ComplexField c2,
                                   ComplexField c0, Assembly assembly)
    : grid_(std::move(grid)), c2_(std::move(c2)), c0_(std::move(c0)), assembly_(assembly) {
    const int N = grid_->size();
    if (c2_.size() != N || c0_.size() != N)
        throw Error("PeriodicOperator: coefficient size mismatch");
    if (assembly_ == Assembly::SpectralDense) {
        dense_ = c2_.asDiagonal() * grid_->diff2();
        dense_.diagonal() += c0_;
    } else {
        // 6th-order centered stencil for the second derivative
        const double h2 = grid_->spacing() * grid_->spacing();
        const double w[4] = {-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0};
        std::vector<Eigen::Triplet<Complex>> trips;
        trips.reserve(7 * N);
        for (int m = 0; m < N; ++m) {
            trips.emplace_back(m, m, c2_[m] * (w[0] / h2) + c0_[m]);
            for (int d = 1; d <= 3; ++d) {
                trips.emplace_back(m, (m + d) % N, c2_[m] * (w[d] / h2));
                trips.emplace_back(m, (m - d + N) % N, c2_[m] * (w[d] / h2));
            }
        }
        sparse_.resize(N, N);
        sparse_.setFromTriplets(trips.begin(), trips.end());
        sparse_.makeCompressed();
    }
}

ComplexField PeriodicOperator::apply(const ComplexField& v) const {
    if (assembly_ == Assembly::SpectralDense) return dense_ * v;
    return sparse_ * v;
}

const Eigen::MatrixXcd& PeriodicOperator::dense() const {
    if (assembly_ != Assembly::SpectralDense)
        throw Error("dense(): stencil assembly has no dense matrix");
    return dense_;
}

void PeriodicOperator::factorize() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (assembly_ == Assembly::SpectralDense) {
        if (!lu_) lu_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXcd>>(dense_);
    } else {
        if (!sparse_lu_) {
            auto slu = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<Complex>>>();
            slu->compute(sparse_);
            if (slu->info() != Eigen::Success) throw NearSingular("sparse factorization failed");
            sparse_lu_ = slu;
        }
    }
}

ComplexField PeriodicOperator::solve(const ComplexField& rhs) const {
    factorize();
    const int N = grid_->size();
    auto apply_inverse = [&](const ComplexField& b) -> ComplexField {
        if (assembly_ == Assembly::SpectralDense) return lu_->solve(b);
        auto slu = std::static_pointer_cast<Eigen::SparseLU<Eigen::SparseMatrix<Complex>>>(sparse_lu_);
        return slu->solve(b);
    };
    // reciprocal condition estimate: ||A||_inf and a short power iteration on A^{-1}
    double anorm;
    if (assembly_ == Assembly::SpectralDense)
        anorm = dense_.cwiseAbs().rowwise().sum().maxCoeff();
    else {
        Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(N);
        for (int c = 0; c < sparse_.outerSize(); ++c)
            for (Eigen::SparseMatrix<Complex>::InnerIterator it(sparse_, c); it; ++it)
                rowsum[it.row()] += std::abs(it.value());
        anorm = rowsum.maxCoeff();
    }
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;
    ComplexField v(N);
    for (int m = 0; m < N; ++m) v[m] = Complex(gauss(rng), gauss(rng));
    v /= v.norm();
    double inv_norm = 0;
    for (int it = 0; it < 3; ++it) {
        v = apply_inverse(v);
        inv_norm = v.norm();
        if (!std::isfinite(inv_norm) || inv_norm == 0) break;
        v /= inv_norm;
    }
    if (!std::isfinite(inv_norm) || inv_norm == 0 || 1.0 / (anorm * inv_norm) < 1e-14)
        throw NearSingular("reciprocal condition estimate below 1e-14");
    return apply_inverse(rhs);
}

ComplexField solve_periodic(const PeriodicOperator& op, const ComplexField& rhs) {
    return op.solve(rhs);
}

}  // namespace oscar
