#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "preheat/bogoliubov.hpp"
#include "preheat/ground_state.hpp"
#include "preheat/lattice.hpp"
#include "preheat/spectral.hpp"

namespace preheat {

/// Gaussian kick of the transverse trap frequency:
/// omega_t(t) / omega0 = 1 + A exp(-(t - t0)^2 / (2 sigma_t^2)).
struct ModulationProtocol {
    double amplitude = 0.75;
    double t0 = 4.0 * 3.14159265358979323846;
    double sigma_t = 0.25;

    void validate() const;
};

double modulation_frequency(const ModulationProtocol& p, double t);

struct PropagatorConfig {
    double dt = 5e-3;
    double t_end = 0.0;
    std::vector<double> save_times;

    /// Checks dt > 0, sorted save times inside [0, t_end] and dt * omega_max <= 0.5.
    void validate(double omega_max) const;
};

/// Second-order split-step integrator of the GPE in the frame rotating at mu:
/// i d_t psi = (h(t) + U |psi|^2 - mu) psi. The kinetic factor is applied
/// exactly (Fourier in x, sine transform in y), the local factor pointwise.
class SplitStepPropagator {
public:
    SplitStepPropagator(const Grid2D& grid, double interaction, double mu, double dt);

    const Grid2D& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }

    /// One Strang step: half local kick, kinetic step, half local kick.
    void step(ComplexField2D& field, double omega_t) const;

    /// `steps` steps from t_start with the trap frequency following `protocol`.
    /// Adjacent half kicks are fused; the result equals repeated step() calls
    /// with the kick evaluated at the step end points.
    void advance(ComplexField2D& field, double t_start, std::size_t steps,
                 const ModulationProtocol& protocol) const;

private:
    // Work arrays are y-major (x contiguous) and 64-byte aligned.
    template <class Frequency>
    void run(ComplexField2D& field, double t_start, std::size_t steps, Frequency&& freq) const;
    void kinetic(AlignedComplexBuffer& data, AlignedComplexBuffer& scratch) const;
    void kick(AlignedComplexBuffer& data, double omega_t, double fraction) const;

    Grid2D grid_;
    double interaction_;
    double mu_;
    double dt_;
    FourierX fourier_;
    std::vector<double> y_squared_;
    AlignedComplexBuffer x_phase_;
    Eigen::MatrixXcd y_propagator_;
};

/// Single split step as a pure function.
ComplexField2D gpe_step(const ComplexField2D& field, double trap_freq, double interaction,
                        double dt, double mu = 0.0);

/// GPE energy  int [psi* T psi + V |psi|^2 + U/2 |psi|^4]  with the spectral kinetic operator.
double gpe_energy(const ComplexField2D& field, double omega_t, double interaction);

/// Per-trajectory seed: splitmix64 finalizer applied to master ^ splitmix64(index).
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

/// Independent complex Gaussian amplitudes with <b> = <b^2> = 0, <|b|^2> = 1/2,
/// one per entry of table.modes (the zero mode gets exactly 0).
std::vector<std::complex<double>> sample_betas(const SpectrumTable& table, std::uint64_t seed);

/// psi = phi + sum (beta u + beta* v*) over the table's non-zero modes.
ComplexField2D synthesize_field(const GroundState& gs, const SpectrumTable& table,
                                std::span<const std::complex<double>> betas);

ComplexField2D sample_initial_field(const GroundState& gs, const SpectrumTable& table,
                                    std::uint64_t seed);

struct EnsembleState {
    std::vector<ComplexField2D> fields;
    double t = 0.0;
    std::uint64_t master_seed = 0;
};

EnsembleState make_vacuum_ensemble(const GroundState& gs, const SpectrumTable& table,
                                   std::size_t trajectories, std::uint64_t master_seed,
                                   std::size_t threads = 1);

/// Called with the ensemble at every save time (including t = 0 when listed).
using Recorder = std::function<void(const EnsembleState&)>;

/// Advances every trajectory to cfg.t_end, stopping at each save time to call
/// `recorder`. Throws BlowUpError naming the first failing trajectory.
void evolve_ensemble(EnsembleState& ens, const GroundState& gs,
                     const ModulationProtocol& protocol, const PropagatorConfig& cfg,
                     const Recorder& recorder, std::size_t threads = 1);

}  // namespace preheat
