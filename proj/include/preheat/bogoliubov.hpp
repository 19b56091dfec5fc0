#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "preheat/ground_state.hpp"

namespace preheat {

/// Branch label by transverse node count: 0 = Goldstone (g), 1 = dipole (d),
/// 2 = breathing (b), j >= 3 = higher branch "h<j>".
struct Branch {
    int nodes = 0;

    static constexpr Branch goldstone() { return {0}; }
    static constexpr Branch dipole() { return {1}; }
    static constexpr Branch breathing() { return {2}; }

    std::string name() const;
    static Branch parse(const std::string& name);
    friend bool operator==(Branch, Branch) = default;
    friend auto operator<=>(Branch, Branch) = default;
};

/// Bogoliubov mode of wave vector k = 2 pi n / Lx. The 2D mode functions are
/// u(r) = exp(i k x) U(y) / sqrt(Lx) and v(r) = exp(i k x) V(y) / sqrt(Lx).
/// The ground state is real, so U and V are real; they obey
/// sum (U^2 - V^2) dy = 1 except for the k = 0 Goldstone zero mode.
struct BogoliubovMode {
    Branch branch;
    long n = 0;
    double k = 0.0;
    double omega = 0.0;
    std::size_t transverse_index = 0;
    bool zero_mode = false;
    Eigen::VectorXd u;
    Eigen::VectorXd v;
};

/// Sum (Ua Ub - Va Vb) dy.
double symplectic_product(const BogoliubovMode& a, const BogoliubovMode& b, double dy);

/// Dense Bogoliubov matrix [[A, B], [-B, -A]] of the block at wave vector k, with
/// A = h_k + 2U phi^2 - mu and B = U phi^2. At k = 0 both blocks are projected
/// orthogonally to the condensate (number-conserving form), which separates the
/// Goldstone zero mode exactly.
Eigen::MatrixXd bogoliubov_matrix(const GroundState& gs, double k);

/// Diagonalizes the block at wave vector k and returns its positive-norm modes
/// sorted by frequency (at k = 0 the flagged zero mode comes first). Throws
/// InstabilityError on complex frequencies or negative-energy positive-norm modes.
std::vector<BogoliubovMode> bogoliubov_at_k(const GroundState& gs, double k);

/// Node count of the phase-aligned U profile. Throws DomainError on a vanishing profile.
Branch classify_branch(const BogoliubovMode& mode);
Branch classify_profile(const Eigen::VectorXcd& profile);

struct SpectrumTable {
    Grid2D grid;
    /// n ascending over (-Nx/2, Nx/2], then by frequency within each n.
    std::vector<BogoliubovMode> modes;
    double omega_b0 = 0.0;
    std::optional<double> k_res_g;
    std::optional<double> k_res_d;
    /// Mode numbers whose block contains repeated node counts.
    std::vector<long> ambiguous;

    std::size_t ny() const { return grid.ny(); }
    /// Position in `modes` of transverse index r of mode number n.
    std::size_t mode_index(long n, std::size_t r) const {
        return static_cast<std::size_t>(n + static_cast<long>(grid.nx() / 2) - 1) * grid.ny() + r;
    }
    /// All modes of mode number n (the block stored for n).
    std::vector<const BogoliubovMode*> block(long n) const;
    /// Lowest mode of branch `b` at n, or nullptr if the block has none.
    const BogoliubovMode* find(long n, Branch b) const;
    double omega_max() const;
};

SpectrumTable build_spectrum_table(const GroundState& gs, std::size_t threads = 1);

/// Wave vector k >= 0 where branch b reaches `omega`, found by bisection on
/// direct block solves between the bracketing grid momenta.
std::optional<double> resonant_momentum(const GroundState& gs, const SpectrumTable& table,
                                        Branch b, double omega);

}  // namespace preheat
