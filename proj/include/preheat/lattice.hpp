#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace preheat {

using cplx = std::complex<double>;

/// Natural units: hbar = m = omega0 = 1. Lengths throughout the library are
/// expressed in the transverse oscillator length ell0 = sqrt(2 hbar / m omega0),
/// energies in hbar*omega0 and times in 1/omega0. In these units the single
/// particle Hamiltonian reads  h = -(1/4) Laplacian + omega_t^2 y^2.
struct Units {
    static constexpr double hbar = 1.0;
    static constexpr double mass = 1.0;
    static constexpr double omega0 = 1.0;
    /// ell0 measured in sqrt(hbar / m omega0).
    static constexpr double ell0 = 1.4142135623730950488;

    /// hbar^2 / (2 m ell0^2) in units of hbar*omega0.
    static constexpr double kinetic = hbar * hbar / (2.0 * mass * ell0 * ell0) / (hbar * omega0);
    /// m omega0^2 ell0^2 / 2 in units of hbar*omega0; prefactor of y^2 in V(y).
    static constexpr double trap = mass * omega0 * omega0 * ell0 * ell0 / 2.0 / (hbar * omega0);
    /// The atomic mass in units of hbar / (omega0 ell0^2).
    static constexpr double mass_ell0 = mass * omega0 * ell0 * ell0 / hbar;
};

/// Periodic x on [0, Lx), hard walls at y = +-Ly/2 with Ny interior points.
/// Field storage is x-major: index(ix, iy) = ix * Ny + iy.
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(double lx, double ly, std::size_t nx, std::size_t ny);

    double lx() const noexcept { return lx_; }
    double ly() const noexcept { return ly_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return nx_ * ny_; }
    double dx() const noexcept { return lx_ / static_cast<double>(nx_); }
    double dy() const noexcept { return ly_ / static_cast<double>(ny_ + 1); }
    double cell() const noexcept { return dx() * dy(); }
    double dk() const noexcept;

    std::size_t index(std::size_t ix, std::size_t iy) const noexcept { return ix * ny_ + iy; }

    double x(std::size_t ix) const noexcept { return static_cast<double>(ix) * dx(); }
    /// y_j = -Ly/2 + (j+1) dy for j = 0..Ny-1 (walls excluded). Evaluated from
    /// the center so that mirror points are exact negatives of each other.
    double y(std::size_t iy) const noexcept {
        return (static_cast<double>(iy + 1) - 0.5 * static_cast<double>(ny_ + 1)) * dy();
    }
    std::vector<double> y_points() const;

    /// Signed mode number n in (-Nx/2, Nx/2] stored at FFT slot m.
    long mode_number(std::size_t slot) const noexcept {
        const long m = static_cast<long>(slot);
        const long nx = static_cast<long>(nx_);
        return m <= nx / 2 ? m : m - nx;
    }
    /// FFT slot holding mode number n (n taken modulo Nx).
    std::size_t slot(long n) const noexcept {
        const long nx = static_cast<long>(nx_);
        return static_cast<std::size_t>(((n % nx) + nx) % nx);
    }
    double k(long n) const noexcept { return dk() * static_cast<double>(n); }
    /// k_n for n in (-Nx/2, Nx/2], ascending.
    std::vector<double> momenta() const;

    /// Transverse kinetic eigenvalues (1/4)(j pi / Ly)^2, j = 1..Ny.
    Eigen::VectorXd sine_eigenvalues() const;
    /// Orthonormal, symmetric, involutive DST-I matrix S_{ij} = sqrt(2/(Ny+1)) sin(pi (i+1)(j+1)/(Ny+1)).
    Eigen::MatrixXd sine_basis() const;
    /// Dense transverse kinetic matrix S diag(lambda) S acting on the interior points.
    Eigen::MatrixXd transverse_kinetic() const;

    friend bool operator==(const Grid2D& a, const Grid2D& b) noexcept {
        return a.lx_ == b.lx_ && a.ly_ == b.ly_ && a.nx_ == b.nx_ && a.ny_ == b.ny_;
    }

private:
    double lx_ = 0.0;
    double ly_ = 0.0;
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
};

Grid2D build_grid(double lx, double ly, std::size_t nx, std::size_t ny);

/// Harmonic transverse trap of frequency omega_t (units of omega0) closed by hard walls.
struct TrapPotential {
    double omega_t = 1.0;
    double ly = 0.0;
};

/// V(y) = omega_t^2 y^2 (i.e. m omega_t^2 y^2 / 2 with y in ell0). Throws DomainError at |y| >= Ly/2.
double potential_at(const TrapPotential& trap, double y);

/// V evaluated on the interior y points of the grid.
Eigen::VectorXd potential_profile(const Grid2D& grid, double omega_t);

/// Complex amplitudes on the interior points of a Grid2D, x-major.
class ComplexField2D {
public:
    ComplexField2D() = default;
    explicit ComplexField2D(const Grid2D& grid) : grid_(grid), values_(grid.size(), cplx{}) {}
    ComplexField2D(const Grid2D& grid, std::vector<cplx> values);

    const Grid2D& grid() const noexcept { return grid_; }
    std::vector<cplx>& values() noexcept { return values_; }
    const std::vector<cplx>& values() const noexcept { return values_; }
    cplx& operator()(std::size_t ix, std::size_t iy) { return values_[grid_.index(ix, iy)]; }
    const cplx& operator()(std::size_t ix, std::size_t iy) const { return values_[grid_.index(ix, iy)]; }

    /// Integral of |psi|^2 over the box (atom number).
    double norm() const noexcept;

    /// Field uniform in x with the given transverse profile.
    static ComplexField2D from_profile(const Grid2D& grid, const Eigen::VectorXd& profile);

private:
    Grid2D grid_;
    std::vector<cplx> values_;
};

/// Riemann-sum inner product  sum conj(a) b dx dy. Throws ShapeError on grid mismatch.
cplx inner_product(const ComplexField2D& a, const ComplexField2D& b);

}  // namespace preheat
