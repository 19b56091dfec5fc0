#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "preheat/lattice.hpp"

namespace preheat {

/// Stationary condensate, uniform along x. `phi` is the transverse profile on
/// the interior y points, normalized so that Lx * sum(phi^2) dy = N.
struct GroundState {
    Grid2D grid;
    double omega_t = 1.0;
    Eigen::VectorXd phi;
    double mu = 0.0;
    double interaction = 0.0;
    double atoms = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;

    double line_density() const { return atoms / grid.lx(); }
    ComplexField2D field() const { return ComplexField2D::from_profile(grid, phi); }
};

struct GroundStateOptions {
    double dtau = 1e-2;
    double mu_tolerance = 1e-10;
    double residual_tolerance = 1e-10;
    std::size_t max_iterations = 200000;
    /// Optional warm start (any positive transverse profile; it is renormalized).
    std::optional<Eigen::VectorXd> initial;
    /// When set, receives the GPE energy after every iteration.
    std::vector<double>* energy_trace = nullptr;
};

/// Single-particle transverse Hamiltonian T_y + V(y) on the interior points.
Eigen::MatrixXd transverse_hamiltonian(const Grid2D& grid, double omega_t);

/// Lowest eigenvalue of the single-particle transverse Hamiltonian.
double single_particle_ground_energy(const Grid2D& grid, double omega_t);

/// GPE energy functional Lx * sum [phi (T+V) phi + U/2 phi^4] dy of an x-uniform profile.
double gpe_energy(const Grid2D& grid, double omega_t, double interaction, const Eigen::VectorXd& phi);

/// ||(h + U phi^2 - mu) phi|| / ||mu phi||.
double stationarity_residual(const Grid2D& grid, double omega_t, double interaction,
                             const Eigen::VectorXd& phi, double mu);

/// Imaginary-time relaxation of the transverse GPE. Each step propagates
/// exp(-H[phi] dtau) with the mean-field potential frozen at the start of the
/// step, followed by renormalization to N and exact y -> -y symmetrization.
/// Converges when mu changes by less than mu_tolerance between steps and the
/// stationarity residual falls below residual_tolerance.
GroundState solve_ground_state(const Grid2D& grid, const TrapPotential& trap, double atoms,
                               double interaction, const GroundStateOptions& options = {});

/// U such that the ground-state chemical potential equals mu_target.
/// Throws InfeasibleError when mu_target lies below the non-interacting level.
double calibrate_interaction(const Grid2D& grid, const TrapPotential& trap, double atoms,
                             double mu_target);

/// Solve for the ground state at a target chemical potential (calibrating U first).
GroundState solve_at_chemical_potential(const Grid2D& grid, const TrapPotential& trap,
                                        double atoms, double mu_target);

/// c = sqrt(n1 dmu/dn1 / m) with dmu/dn1 from a centered difference at N(1 +- 1e-3).
double compressibility_sound_speed(const GroundState& gs);

}  // namespace preheat
