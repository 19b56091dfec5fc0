#include "preheat/twa.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "preheat/errors.hpp"
#include "preheat/parallel.hpp"

namespace preheat {

void ModulationProtocol::validate() const {
    if (!(amplitude >= -1.0)) throw ConfigError("kick amplitude must be >= -1");
    if (!(sigma_t > 0.0)) throw ConfigError("kick duration sigma_t must be positive");
    if (!std::isfinite(t0)) throw ConfigError("kick time t0 must be finite");
}

double modulation_frequency(const ModulationProtocol& p, double t) {
    const double s = (t - p.t0) / p.sigma_t;
    return 1.0 + p.amplitude * std::exp(-0.5 * s * s);
}

void PropagatorConfig::validate(double omega_max) const {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
    if (!std::is_sorted(save_times.begin(), save_times.end())) {
        throw ConfigError("save times must be sorted");
    }
    if (!save_times.empty() && (save_times.front() < 0.0 || save_times.back() > t_end * (1 + 1e-12))) {
        throw ConfigError("save times must lie within [0, t_end]");
    }
    if (dt * omega_max > 0.5) {
        throw ConfigError("time step does not resolve the fastest Bogoliubov mode: dt * omega_max = " +
                          std::to_string(dt * omega_max) + " > 0.5");
    }
}

SplitStepPropagator::SplitStepPropagator(const Grid2D& grid, double interaction, double mu,
                                         double dt)
    : grid_(grid),
      interaction_(interaction),
      mu_(mu),
      dt_(dt),
      fourier_(grid.nx(), grid.ny(), FourierX::Layout::y_major) {
    const std::size_t nx = grid.nx();
    const auto ny = static_cast<Eigen::Index>(grid.ny());

    y_squared_.resize(grid.ny());
    for (std::size_t j = 0; j < grid.ny(); ++j) y_squared_[j] = grid.y(j) * grid.y(j);

    // FFT normalization folded into the x phase
    x_phase_.resize(nx);
    for (std::size_t m = 0; m < nx; ++m) {
        const double k = grid.k(grid.mode_number(m));
        x_phase_[m] = std::polar(1.0 / static_cast<double>(nx), -Units::kinetic * k * k * dt);
    }

    const Eigen::MatrixXd s = grid.sine_basis();
    const Eigen::VectorXd lambda = grid.sine_eigenvalues();
    Eigen::VectorXcd phase(ny);
    for (Eigen::Index j = 0; j < ny; ++j) phase(j) = std::polar(1.0, -lambda(j) * dt);
    y_propagator_ = s.cast<std::complex<double>>() * phase.asDiagonal() * s.cast<std::complex<double>>();
}

void SplitStepPropagator::kinetic(AlignedComplexBuffer& data, AlignedComplexBuffer& scratch) const {
    const auto nx = static_cast<Eigen::Index>(grid_.nx());
    const auto ny = static_cast<Eigen::Index>(grid_.ny());
    Eigen::Map<Eigen::MatrixXcd> psi(data.data(), nx, ny);
    Eigen::Map<Eigen::MatrixXcd> tmp(scratch.data(), nx, ny);
    // the sine propagator is symmetric
    tmp.noalias() = psi * y_propagator_;

    fourier_.forward(scratch.data());
    // spelled out: std::complex operator* takes the slow inf/nan path
    const auto* phase = reinterpret_cast<const double*>(x_phase_.data());
    for (Eigen::Index j = 0; j < ny; ++j) {
        auto* col = reinterpret_cast<double*>(scratch.data() + j * nx);
        for (Eigen::Index m = 0; m < nx; ++m) {
            const double re = col[2 * m];
            const double im = col[2 * m + 1];
            col[2 * m] = re * phase[2 * m] - im * phase[2 * m + 1];
            col[2 * m + 1] = re * phase[2 * m + 1] + im * phase[2 * m];
        }
    }
    fourier_.backward(scratch.data());
    data.swap(scratch);
}

namespace {

// exp(-i x) for |x| <= 0.1 to full double precision; vectorizes.
inline void small_rotation(double x, double& c, double& s) {
    const double x2 = x * x;
    c = 1.0 + x2 * (-1.0 / 2 + x2 * (1.0 / 24 + x2 * (-1.0 / 720 + x2 * (1.0 / 40320 +
               x2 * (-1.0 / 3628800)))));
    s = x * (1.0 + x2 * (-1.0 / 6 + x2 * (1.0 / 120 + x2 * (-1.0 / 5040 + x2 * (1.0 / 362880 +
                x2 * (-1.0 / 39916800))))));
}

constexpr double small_rotation_limit = 0.1;

}  // namespace

void SplitStepPropagator::kick(AlignedComplexBuffer& data, double omega_t, double fraction) const {
    const std::size_t nx = grid_.nx();
    const std::size_t ny = grid_.ny();
    const double h = fraction * dt_;
    const double trap = Units::trap * omega_t * omega_t;
    const double g = interaction_ * h;
    for (std::size_t j = 0; j < ny; ++j) {
        const double offset = (trap * y_squared_[j] - mu_) * h;
        const double co = std::cos(offset);
        const double so = std::sin(offset);
        double* col = reinterpret_cast<double*>(data.data() + j * nx);

        // integer reduction so the scan vectorizes without fast-math
        int large = 0;
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = g * (col[2 * i] * col[2 * i] + col[2 * i + 1] * col[2 * i + 1]);
            large |= static_cast<int>(std::abs(x) > small_rotation_limit);
        }
        if (large == 0) {
            for (std::size_t i = 0; i < nx; ++i) {
                const double re = col[2 * i];
                const double im = col[2 * i + 1];
                double c;
                double s;
                small_rotation(g * (re * re + im * im), c, s);
                const double ct = co * c - so * s;
                const double st = so * c + co * s;
                col[2 * i] = re * ct + im * st;
                col[2 * i + 1] = im * ct - re * st;
            }
        } else {
            for (std::size_t i = 0; i < nx; ++i) {
                const double re = col[2 * i];
                const double im = col[2 * i + 1];
                const double x = g * (re * re + im * im);
                const double ct = co * std::cos(x) - so * std::sin(x);
                const double st = so * std::cos(x) + co * std::sin(x);
                col[2 * i] = re * ct + im * st;
                col[2 * i + 1] = im * ct - re * st;
            }
        }
    }
}

template <class Frequency>
void SplitStepPropagator::run(ComplexField2D& field, double t_start, std::size_t steps,
                              Frequency&& freq) const {
    if (steps == 0) return;
    const auto nx = static_cast<Eigen::Index>(grid_.nx());
    const auto ny = static_cast<Eigen::Index>(grid_.ny());
    AlignedComplexBuffer work(grid_.size());
    AlignedComplexBuffer scratch(grid_.size());
    Eigen::Map<Eigen::MatrixXcd> xmajor(field.values().data(), ny, nx);
    Eigen::Map<Eigen::MatrixXcd>(work.data(), nx, ny) = xmajor.transpose();

    kick(work, freq(t_start), 0.5);
    for (std::size_t s = 1; s <= steps; ++s) {
        kinetic(work, scratch);
        const double t = t_start + static_cast<double>(s) * dt_;
        kick(work, freq(t), s < steps ? 1.0 : 0.5);
    }
    xmajor = Eigen::Map<Eigen::MatrixXcd>(work.data(), nx, ny).transpose();
}

void SplitStepPropagator::step(ComplexField2D& field, double omega_t) const {
    run(field, 0.0, 1, [omega_t](double) { return omega_t; });
}

void SplitStepPropagator::advance(ComplexField2D& field, double t_start, std::size_t steps,
                                  const ModulationProtocol& protocol) const {
    run(field, t_start, steps, [&protocol](double t) { return modulation_frequency(protocol, t); });
}

ComplexField2D gpe_step(const ComplexField2D& field, double trap_freq, double interaction,
                        double dt, double mu) {
    SplitStepPropagator prop(field.grid(), interaction, mu, dt);
    ComplexField2D out = field;
    prop.step(out, trap_freq);
    return out;
}

double gpe_energy(const ComplexField2D& field, double omega_t, double interaction) {
    const Grid2D& grid = field.grid();
    const auto nx = static_cast<Eigen::Index>(grid.nx());
    const auto ny = static_cast<Eigen::Index>(grid.ny());

    std::vector<std::complex<double>> buf(grid.size());
    Eigen::Map<const Eigen::MatrixXcd> psi(field.values().data(), ny, nx);
    Eigen::Map<Eigen::MatrixXcd> hat(buf.data(), ny, nx);
    hat.noalias() = grid.sine_basis().cast<std::complex<double>>() * psi;
    FourierX(grid.nx(), grid.ny()).forward(buf.data());

    const Eigen::VectorXd lambda = grid.sine_eigenvalues();
    double kin = 0.0;
    for (Eigen::Index m = 0; m < nx; ++m) {
        const double k = grid.k(grid.mode_number(static_cast<std::size_t>(m)));
        for (Eigen::Index j = 0; j < ny; ++j) {
            kin += (Units::kinetic * k * k + lambda(j)) * std::norm(hat(j, m));
        }
    }
    kin /= static_cast<double>(grid.nx());

    const Eigen::VectorXd v = potential_profile(grid, omega_t);
    double pot = 0.0;
    double inter = 0.0;
    for (Eigen::Index ix = 0; ix < nx; ++ix) {
        for (Eigen::Index j = 0; j < ny; ++j) {
            const double n = std::norm(psi(j, ix));
            pot += v(j) * n;
            inter += 0.5 * interaction * n * n;
        }
    }
    return (kin + pot + inter) * grid.cell();
}

namespace {
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(master_seed ^ splitmix64(index));
}

std::vector<std::complex<double>> sample_betas(const SpectrumTable& table, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    // Re and Im each of variance 1/4
    std::normal_distribution<double> normal(0.0, 0.5);
    std::vector<std::complex<double>> betas(table.modes.size());
    for (std::size_t i = 0; i < table.modes.size(); ++i) {
        if (table.modes[i].zero_mode) continue;
        const double re = normal(engine);
        const double im = normal(engine);
        betas[i] = {re, im};
    }
    return betas;
}

ComplexField2D synthesize_field(const GroundState& gs, const SpectrumTable& table,
                                std::span<const std::complex<double>> betas) {
    const Grid2D& grid = gs.grid;
    if (!(table.grid == grid) || betas.size() != table.modes.size()) {
        throw ShapeError("amplitudes do not match the spectrum table");
    }
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    const auto eny = static_cast<Eigen::Index>(ny);

    // a_n(y) = sum_r beta_{n,r} U_{n,r}(y) + conj(beta_{-n,r}) V_{-n,r}(y), stored at FFT slots
    std::vector<std::complex<double>> coeff(grid.size());
    for (std::size_t i = 0; i < table.modes.size(); ++i) {
        const BogoliubovMode& mode = table.modes[i];
        if (mode.zero_mode) continue;
        const std::complex<double> beta = betas[i];
        std::complex<double>* plus = coeff.data() + grid.slot(mode.n) * ny;
        std::complex<double>* minus = coeff.data() + grid.slot(-mode.n) * ny;
        const std::complex<double> cb = std::conj(beta);
        for (Eigen::Index j = 0; j < eny; ++j) {
            plus[j] += beta * mode.u(j);
            minus[j] += cb * mode.v(j);
        }
    }
    FourierX(nx, ny).backward(coeff.data());

    ComplexField2D field = gs.field();
    const double scale = 1.0 / std::sqrt(grid.lx());
    auto& values = field.values();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += scale * coeff[i];
    return field;
}

ComplexField2D sample_initial_field(const GroundState& gs, const SpectrumTable& table,
                                    std::uint64_t seed) {
    const auto betas = sample_betas(table, seed);
    return synthesize_field(gs, table, betas);
}

EnsembleState make_vacuum_ensemble(const GroundState& gs, const SpectrumTable& table,
                                   std::size_t trajectories, std::uint64_t master_seed,
                                   std::size_t threads) {
    if (trajectories == 0) throw ConfigError("ensemble needs at least one trajectory");
    EnsembleState ens;
    ens.master_seed = master_seed;
    ens.t = 0.0;
    ens.fields.resize(trajectories);
    parallel_for(trajectories, threads, [&](std::size_t i) {
        ens.fields[i] = sample_initial_field(gs, table, trajectory_seed(master_seed, i));
    });
    return ens;
}

void evolve_ensemble(EnsembleState& ens, const GroundState& gs,
                     const ModulationProtocol& protocol, const PropagatorConfig& cfg,
                     const Recorder& recorder, std::size_t threads) {
    protocol.validate();
    if (!std::is_sorted(cfg.save_times.begin(), cfg.save_times.end())) {
        throw ConfigError("save times must be sorted");
    }
    struct Stop {
        double t;
        bool record;
    };
    std::vector<Stop> stops;
    for (double ts : cfg.save_times) {
        if (ts >= ens.t - 1e-12 && ts <= cfg.t_end * (1 + 1e-12)) stops.push_back({ts, true});
    }
    if (stops.empty() || stops.back().t < cfg.t_end * (1 - 1e-12)) stops.push_back({cfg.t_end, false});

    for (const Stop& stop : stops) {
        const double target = stop.t;
        const double span = target - ens.t;
        if (span > 1e-12) {
            const auto steps = static_cast<std::size_t>(std::ceil(span / cfg.dt - 1e-9));
            const SplitStepPropagator prop(gs.grid, gs.interaction, gs.mu,
                                           span / static_cast<double>(steps));
            const double t_start = ens.t;
            parallel_for(ens.fields.size(), threads, [&](std::size_t i) {
                prop.advance(ens.fields[i], t_start, steps, protocol);
            });
            ens.t = target;
            for (std::size_t i = 0; i < ens.fields.size(); ++i) {
                if (!std::isfinite(ens.fields[i].norm())) {
                    throw BlowUpError("trajectory " + std::to_string(i) +
                                          " produced non-finite values by t = " +
                                          std::to_string(ens.t),
                                      i, ens.t);
                }
            }
        } else {
            ens.t = target;
        }
        if (stop.record && recorder) recorder(ens);
    }
}

}  // namespace preheat
