#include "preheat/bogoliubov_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "preheat/errors.hpp"

namespace preheat {

Eigen::MatrixXd dense_x_kinetic(const Grid2D& grid) {
    const auto nx = static_cast<Eigen::Index>(grid.nx());
    Eigen::MatrixXd t(nx, nx);
    for (Eigen::Index a = 0; a < nx; ++a) {
        for (Eigen::Index b = 0; b < nx; ++b) {
            double s = 0.0;
            for (Eigen::Index m = 0; m < nx; ++m) {
                const long n = grid.mode_number(static_cast<std::size_t>(m));
                const double k = grid.k(n);
                s += Units::kinetic * k * k *
                     std::cos(2.0 * std::numbers::pi * static_cast<double>(n * (a - b)) /
                              static_cast<double>(nx));
            }
            t(a, b) = s / static_cast<double>(nx);
        }
    }
    return t;
}

Eigen::MatrixXd full_bogoliubov_matrix(const GroundState& gs) {
    const Grid2D& grid = gs.grid;
    const auto nx = static_cast<Eigen::Index>(grid.nx());
    const auto ny = static_cast<Eigen::Index>(grid.ny());
    const Eigen::Index m = nx * ny;

    const Eigen::MatrixXd tx = dense_x_kinetic(grid);
    const Eigen::VectorXd density = gs.phi.cwiseAbs2();
    Eigen::MatrixXd local = grid.transverse_kinetic();
    local.diagonal() += potential_profile(grid, gs.omega_t) + 2.0 * gs.interaction * density;
    local.diagonal().array() -= gs.mu;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < nx; ++i) {
        for (Eigen::Index j = 0; j < nx; ++j) {
            a.block(i * ny, j * ny, ny, ny).diagonal().array() += tx(i, j);
        }
        a.block(i * ny, i * ny, ny, ny) += local;
        b.block(i * ny, i * ny, ny, ny).diagonal() = gs.interaction * density;
    }

    Eigen::VectorXd unit(m);
    for (Eigen::Index i = 0; i < nx; ++i) unit.segment(i * ny, ny) = gs.phi;
    unit.normalize();
    const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(m, m) - unit * unit.transpose();
    a = q * a * q;
    b = q * b * q;
    a = 0.5 * (a + a.transpose());
    b = 0.5 * (b + b.transpose());

    Eigen::MatrixXd l(2 * m, 2 * m);
    l.topLeftCorner(m, m) = a;
    l.topRightCorner(m, m) = b;
    l.bottomLeftCorner(m, m) = -b;
    l.bottomRightCorner(m, m) = -a;
    return l;
}

namespace {

// (T w)(ix, iy) = w(ix + 1, iy) on both halves; eigenvalue exp(i k dx) on plane waves.
Eigen::MatrixXcd translate(const Eigen::MatrixXcd& w, std::size_t nx, std::size_t ny) {
    Eigen::MatrixXcd out(w.rows(), w.cols());
    const auto m = static_cast<Eigen::Index>(nx * ny);
    const auto eny = static_cast<Eigen::Index>(ny);
    for (Eigen::Index half = 0; half < 2; ++half) {
        for (Eigen::Index ix = 0; ix < static_cast<Eigen::Index>(nx); ++ix) {
            const Eigen::Index src = (ix + 1) % static_cast<Eigen::Index>(nx);
            out.middleRows(half * m + ix * eny, eny) = w.middleRows(half * m + src * eny, eny);
        }
    }
    return out;
}

}  // namespace

std::vector<OracleMode> brute_force_spectrum(const GroundState& gs) {
    const Grid2D& grid = gs.grid;
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    const auto eny = static_cast<Eigen::Index>(ny);
    const auto m = static_cast<Eigen::Index>(nx * ny);
    const double dy = grid.dy();

    const Eigen::MatrixXd l = full_bogoliubov_matrix(gs);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(l, true);
    if (solver.info() != Eigen::Success) throw NumericalError("oracle eigensolver failed");
    const Eigen::VectorXcd lambda = solver.eigenvalues();
    const Eigen::MatrixXcd vectors = solver.eigenvectors();
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());

    std::vector<Eigen::Index> positive;
    std::size_t zero_count = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (std::abs(lambda(i).imag()) > 1e-8) {
            throw InstabilityError("oracle: complex Bogoliubov frequency " +
                                   std::to_string(lambda(i).imag()));
        }
        const double w = lambda(i).real();
        if (std::abs(w) < 1e-9 * scale) {
            ++zero_count;
        } else if (w > 0.0) {
            positive.push_back(i);
        }
    }
    if (zero_count != 2 || positive.size() != nx * ny - 1) {
        throw NumericalError("oracle: unexpected eigenvalue count");
    }
    std::sort(positive.begin(), positive.end(),
              [&](Eigen::Index a, Eigen::Index b) { return lambda(a).real() < lambda(b).real(); });

    std::vector<OracleMode> modes;
    const double step = 2.0 * std::numbers::pi / static_cast<double>(nx);
    std::size_t start = 0;
    while (start < positive.size()) {
        std::size_t end = start + 1;
        while (end < positive.size() &&
               lambda(positive[end]).real() - lambda(positive[start]).real() < 1e-9 * scale) {
            ++end;
        }
        const auto count = static_cast<Eigen::Index>(end - start);
        Eigen::MatrixXcd cluster(2 * m, count);
        for (Eigen::Index c = 0; c < count; ++c) cluster.col(c) = vectors.col(positive[start + c]);
        const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(cluster);
        const Eigen::MatrixXcd basis =
            qr.householderQ() * Eigen::MatrixXcd::Identity(2 * m, count);
        const Eigen::MatrixXcd tsub = basis.adjoint() * translate(basis, nx, ny);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> tsolver(tsub, true);

        for (Eigen::Index c = 0; c < count; ++c) {
            const Eigen::VectorXcd w = basis * tsolver.eigenvectors().col(c);
            long n = std::lround(std::arg(tsolver.eigenvalues()(c)) / step);
            if (n <= -static_cast<long>(nx / 2)) n += static_cast<long>(nx);

            OracleMode mode;
            mode.n = n;
            mode.k = grid.k(n);
            mode.u = Eigen::VectorXcd::Zero(eny);
            mode.v = Eigen::VectorXcd::Zero(eny);
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const cplx phase = std::polar(1.0, -mode.k * grid.x(ix));
                const auto off = static_cast<Eigen::Index>(ix * ny);
                mode.u += phase * w.segment(off, eny);
                mode.v += phase * w.segment(m + off, eny);
            }
            const double norm = (mode.u.squaredNorm() - mode.v.squaredNorm()) * dy;
            if (!(norm > 0.0)) throw NumericalError("oracle: positive frequency with non-positive norm");
            Eigen::Index peak = 0;
            mode.u.cwiseAbs().maxCoeff(&peak);
            const cplx rot = std::polar(1.0 / std::sqrt(norm), -std::arg(mode.u(peak)));
            mode.u *= rot;
            mode.v *= rot;
            mode.omega = lambda(positive[start + c]).real();
            mode.branch = classify_profile(mode.u);
            modes.push_back(std::move(mode));
        }
        start = end;
    }

    OracleMode zero;
    zero.n = 0;
    zero.zero_mode = true;
    zero.u = (gs.phi / std::sqrt(gs.phi.squaredNorm() * dy)).cast<cplx>();
    zero.v = -zero.u;
    modes.push_back(std::move(zero));

    std::stable_sort(modes.begin(), modes.end(), [](const OracleMode& a, const OracleMode& b) {
        if (a.n != b.n) return a.n < b.n;
        if (a.zero_mode != b.zero_mode) return a.zero_mode;
        return a.omega < b.omega;
    });
    return modes;
}

}  // namespace preheat
