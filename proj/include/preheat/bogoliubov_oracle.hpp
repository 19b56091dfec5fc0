#pragma once

#include <vector>

#include <Eigen/Dense>

#include "preheat/bogoliubov.hpp"
#include "preheat/ground_state.hpp"

namespace preheat {

/// Brute-force reference spectrum for small grids. The full 2 Nx Ny real
/// Bogoliubov matrix is built in position space (dense Fourier kinetic matrix
/// in x) and diagonalized without using translation invariance; k labels are
/// recovered afterwards from the lattice translation restricted to each
/// degenerate eigenspace.
struct OracleMode {
    Branch branch;
    long n = 0;
    double k = 0.0;
    double omega = 0.0;
    bool zero_mode = false;
    /// Transverse profiles extracted from the 2D eigenvector, symplectically
    /// normalized, phase fixed so the largest U entry is real positive.
    Eigen::VectorXcd u;
    Eigen::VectorXcd v;
};

/// Dense x kinetic matrix (1/4) d_x^2 in its spectral form.
Eigen::MatrixXd dense_x_kinetic(const Grid2D& grid);

/// Full position-space matrix [[A, B], [-B, -A]] (x-major points), with A and B
/// projected orthogonally to the condensate.
Eigen::MatrixXd full_bogoliubov_matrix(const GroundState& gs);

/// Modes sorted like SpectrumTable::modes (n ascending, then omega); the zero
/// mode is reported first in the n = 0 block. Intended for Nx * Ny <~ 500.
std::vector<OracleMode> brute_force_spectrum(const GroundState& gs);

}  // namespace preheat
