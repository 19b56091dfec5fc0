#include "preheat/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "preheat/errors.hpp"

namespace preheat {

namespace {

void symmetrize(Eigen::VectorXd& phi) {
    const Eigen::Index n = phi.size();
    for (Eigen::Index j = 0; j < n / 2; ++j) {
        const double mean = 0.5 * (phi(j) + phi(n - 1 - j));
        phi(j) = mean;
        phi(n - 1 - j) = mean;
    }
}

void normalize(Eigen::VectorXd& phi, double line_density, double dy) {
    phi *= std::sqrt(line_density / (phi.squaredNorm() * dy));
}

Eigen::MatrixXd mean_field_hamiltonian(const Eigen::MatrixXd& h0, double interaction,
                                       const Eigen::VectorXd& phi) {
    Eigen::MatrixXd h = h0;
    h.diagonal() += interaction * phi.cwiseAbs2();
    return h;
}

double rayleigh_mu(const Eigen::MatrixXd& h, const Eigen::VectorXd& phi) {
    return phi.dot(h * phi) / phi.squaredNorm();
}

}  // namespace

Eigen::MatrixXd transverse_hamiltonian(const Grid2D& grid, double omega_t) {
    Eigen::MatrixXd h = grid.transverse_kinetic();
    h.diagonal() += potential_profile(grid, omega_t);
    return h;
}

double single_particle_ground_energy(const Grid2D& grid, double omega_t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(transverse_hamiltonian(grid, omega_t),
                                                       Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

double gpe_energy(const Grid2D& grid, double omega_t, double interaction,
                  const Eigen::VectorXd& phi) {
    const Eigen::MatrixXd h0 = transverse_hamiltonian(grid, omega_t);
    const double quadratic = phi.dot(h0 * phi);
    const double quartic = 0.5 * interaction * phi.cwiseAbs2().squaredNorm();
    return grid.lx() * grid.dy() * (quadratic + quartic);
}

double stationarity_residual(const Grid2D& grid, double omega_t, double interaction,
                             const Eigen::VectorXd& phi, double mu) {
    const Eigen::MatrixXd h = mean_field_hamiltonian(transverse_hamiltonian(grid, omega_t),
                                                     interaction, phi);
    const Eigen::VectorXd r = h * phi - mu * phi;
    return r.norm() / (std::abs(mu) * phi.norm());
}

GroundState solve_ground_state(const Grid2D& grid, const TrapPotential& trap, double atoms,
                               double interaction, const GroundStateOptions& options) {
    if (!(atoms > 0.0)) throw ConfigError("atom number must be positive");
    if (!(interaction >= 0.0)) throw ConfigError("interaction strength must be non-negative");

    const auto ny = static_cast<Eigen::Index>(grid.ny());
    const double dy = grid.dy();
    const double n1 = atoms / grid.lx();
    const Eigen::MatrixXd h0 = transverse_hamiltonian(grid, trap.omega_t);

    Eigen::VectorXd phi(ny);
    if (options.initial && options.initial->size() == ny) {
        phi = options.initial->cwiseAbs();
    } else {
        for (Eigen::Index j = 0; j < ny; ++j) {
            const double y = grid.y(static_cast<std::size_t>(j));
            phi(j) = std::exp(-0.5 * y * y);
        }
    }
    symmetrize(phi);
    normalize(phi, n1, dy);

    Eigen::MatrixXd h = mean_field_hamiltonian(h0, interaction, phi);
    double mu = rayleigh_mu(h, phi);
    double residual = 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;

    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        eig.compute(h);
        const Eigen::VectorXd& lambda = eig.eigenvalues();
        const Eigen::MatrixXd& vecs = eig.eigenvectors();
        const Eigen::VectorXd decay =
            (-(lambda.array() - lambda(0)) * options.dtau).exp().matrix();
        phi = vecs * decay.asDiagonal() * (vecs.transpose() * phi);
        symmetrize(phi);
        normalize(phi, n1, dy);

        h = mean_field_hamiltonian(h0, interaction, phi);
        const double mu_next = rayleigh_mu(h, phi);
        residual = (h * phi - mu_next * phi).norm() / (std::abs(mu_next) * phi.norm());
        if (options.energy_trace) {
            options.energy_trace->push_back(gpe_energy(grid, trap.omega_t, interaction, phi));
        }
        const double change = std::abs(mu_next - mu);
        mu = mu_next;
        if (change < options.mu_tolerance && residual < options.residual_tolerance) {
            if ((phi.array() <= 0.0).any()) {
                throw NumericalError("ground-state profile has a node");
            }
            GroundState gs;
            gs.grid = grid;
            gs.omega_t = trap.omega_t;
            gs.phi = phi;
            gs.mu = mu;
            gs.interaction = interaction;
            gs.atoms = atoms;
            gs.residual = residual;
            gs.iterations = it;
            return gs;
        }
    }
    throw ConvergenceError("imaginary-time relaxation did not converge after " +
                               std::to_string(options.max_iterations) +
                               " iterations, residual " + std::to_string(residual),
                           residual);
}

namespace {

struct CalibrationResult {
    double interaction;
    GroundState state;
};

CalibrationResult calibrate(const Grid2D& grid, const TrapPotential& trap, double atoms,
                            double mu_target) {
    if (!(atoms > 0.0)) throw ConfigError("atom number must be positive");
    const double e0 = single_particle_ground_energy(grid, trap.omega_t);
    const double tie = 1e-12 * std::max(1.0, std::abs(e0));
    if (mu_target < e0 - tie) {
        throw InfeasibleError("target chemical potential " + std::to_string(mu_target) +
                              " lies below the non-interacting ground energy " +
                              std::to_string(e0));
    }
    if (mu_target <= e0 + tie) {
        return {0.0, solve_ground_state(grid, trap, atoms, 0.0)};
    }

    GroundStateOptions options;
    auto mu_of = [&](double u) {
        GroundState gs = solve_ground_state(grid, trap, atoms, u, options);
        options.initial = gs.phi;
        return gs.mu;
    };

    // Thomas-Fermi-like initial bracket, widened until it straddles the target.
    const double n1 = atoms / grid.lx();
    double lo = 0.0;
    double hi = (mu_target - e0) * grid.ly() / n1;
    double f_hi = mu_of(hi) - mu_target;
    while (f_hi < 0.0) {
        lo = hi;
        hi *= 2.0;
        f_hi = mu_of(hi) - mu_target;
    }
    const double f_lo = lo == 0.0 ? e0 - mu_target : mu_of(lo) - mu_target;

    std::uintmax_t max_iter = 200;
    const auto tol = boost::math::tools::eps_tolerance<double>(48);
    auto [a, b] = boost::math::tools::toms748_solve(
        [&](double u) { return mu_of(u) - mu_target; }, lo, hi, f_lo, f_hi, tol, max_iter);
    const double u = 0.5 * (a + b);
    options.initial.reset();
    GroundState gs = solve_ground_state(grid, trap, atoms, u, options);
    return {u, std::move(gs)};
}

}  // namespace

double calibrate_interaction(const Grid2D& grid, const TrapPotential& trap, double atoms,
                             double mu_target) {
    return calibrate(grid, trap, atoms, mu_target).interaction;
}

GroundState solve_at_chemical_potential(const Grid2D& grid, const TrapPotential& trap,
                                        double atoms, double mu_target) {
    return calibrate(grid, trap, atoms, mu_target).state;
}

double compressibility_sound_speed(const GroundState& gs) {
    if (gs.interaction == 0.0) return 0.0;
    const double rel = 1e-3;
    const TrapPotential trap{gs.omega_t, gs.grid.ly()};
    GroundStateOptions options;
    options.initial = gs.phi;
    options.mu_tolerance = 1e-13;
    options.residual_tolerance = 1e-12;
    const double mu_plus =
        solve_ground_state(gs.grid, trap, gs.atoms * (1.0 + rel), gs.interaction, options).mu;
    const double mu_minus =
        solve_ground_state(gs.grid, trap, gs.atoms * (1.0 - rel), gs.interaction, options).mu;
    const double n1 = gs.line_density();
    const double dmu_dn1 = (mu_plus - mu_minus) / (2.0 * rel * n1);
    if (!(dmu_dn1 > 0.0) || !std::isfinite(dmu_dn1)) {
        throw ConvergenceError("finite-difference compressibility is not positive", dmu_dn1);
    }
    return std::sqrt(n1 * dmu_dn1 / Units::mass_ell0);
}

}  // namespace preheat
