#include "preheat/lattice.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "preheat/errors.hpp"

namespace preheat {

Grid2D::Grid2D(double lx, double ly, std::size_t nx, std::size_t ny)
    : lx_(lx), ly_(ly), nx_(nx), ny_(ny) {
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
        throw ConfigError("grid lengths must be positive and finite");
    }
    if (nx < 8 || nx % 2 != 0) {
        throw ConfigError("Nx must be even and >= 8, got " + std::to_string(nx));
    }
    if (ny < 2) {
        throw ConfigError("Ny must be >= 2, got " + std::to_string(ny));
    }
}

Grid2D build_grid(double lx, double ly, std::size_t nx, std::size_t ny) {
    return Grid2D(lx, ly, nx, ny);
}

double Grid2D::dk() const noexcept { return 2.0 * std::numbers::pi / lx_; }

std::vector<double> Grid2D::y_points() const {
    std::vector<double> ys(ny_);
    for (std::size_t j = 0; j < ny_; ++j) ys[j] = y(j);
    return ys;
}

std::vector<double> Grid2D::momenta() const {
    std::vector<double> ks;
    ks.reserve(nx_);
    const long half = static_cast<long>(nx_ / 2);
    for (long n = -half + 1; n <= half; ++n) ks.push_back(k(n));
    return ks;
}

Eigen::VectorXd Grid2D::sine_eigenvalues() const {
    Eigen::VectorXd lambda(static_cast<Eigen::Index>(ny_));
    for (std::size_t j = 0; j < ny_; ++j) {
        const double q = static_cast<double>(j + 1) * std::numbers::pi / ly_;
        lambda(static_cast<Eigen::Index>(j)) = Units::kinetic * q * q;
    }
    return lambda;
}

Eigen::MatrixXd Grid2D::sine_basis() const {
    const auto n = static_cast<Eigen::Index>(ny_);
    const double scale = std::sqrt(2.0 / static_cast<double>(ny_ + 1));
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            s(i, j) = scale * std::sin(std::numbers::pi * static_cast<double>((i + 1) * (j + 1)) /
                                       static_cast<double>(ny_ + 1));
        }
    }
    return s;
}

Eigen::MatrixXd Grid2D::transverse_kinetic() const {
    const Eigen::MatrixXd s = sine_basis();
    Eigen::MatrixXd t = s * sine_eigenvalues().asDiagonal() * s;
    // exact symmetry keeps downstream even/odd structure intact
    return 0.5 * (t + t.transpose());
}

double potential_at(const TrapPotential& trap, double y) {
    if (std::abs(y) >= 0.5 * trap.ly) {
        throw DomainError("potential queried at or beyond the hard wall, y = " + std::to_string(y));
    }
    return Units::trap * trap.omega_t * trap.omega_t * y * y;
}

Eigen::VectorXd potential_profile(const Grid2D& grid, double omega_t) {
    const TrapPotential trap{omega_t, grid.ly()};
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.ny()));
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        v(static_cast<Eigen::Index>(j)) = potential_at(trap, grid.y(j));
    }
    return v;
}

ComplexField2D::ComplexField2D(const Grid2D& grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ShapeError("field has " + std::to_string(values_.size()) + " values, grid needs " +
                         std::to_string(grid_.size()));
    }
}

double ComplexField2D::norm() const noexcept {
    double sum = 0.0;
    for (const cplx& z : values_) sum += std::norm(z);
    return sum * grid_.cell();
}

ComplexField2D ComplexField2D::from_profile(const Grid2D& grid, const Eigen::VectorXd& profile) {
    if (static_cast<std::size_t>(profile.size()) != grid.ny()) {
        throw ShapeError("transverse profile length does not match Ny");
    }
    ComplexField2D field(grid);
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
            field(ix, iy) = profile(static_cast<Eigen::Index>(iy));
        }
    }
    return field;
}

cplx inner_product(const ComplexField2D& a, const ComplexField2D& b) {
    if (!(a.grid() == b.grid()) || a.values().size() != b.values().size()) {
        throw ShapeError("inner product of fields on different grids");
    }
    cplx sum{};
    const auto& av = a.values();
    const auto& bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) sum += std::conj(av[i]) * bv[i];
    return sum * a.grid().cell();
}

}  // namespace preheat
