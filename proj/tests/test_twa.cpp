#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "preheat/errors.hpp"
#include "preheat/observables.hpp"
#include "preheat/twa.hpp"
#include "support.hpp"

using namespace testing;

namespace {

double centroid(const ComplexField2D& f) {
    const Grid2D& g = f.grid();
    double num = 0.0, den = 0.0;
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
        for (std::size_t iy = 0; iy < g.ny(); ++iy) {
            const double p = std::norm(f(ix, iy));
            num += p * g.y(iy);
            den += p;
        }
    }
    return num / den;
}

// Relative change of the breathing-period-averaged energy, first vs last period.
double averaged_energy_drift(const std::vector<double>& e, std::size_t per_period) {
    const double first = std::accumulate(e.begin(), e.begin() + per_period, 0.0) / per_period;
    const double last = std::accumulate(e.end() - per_period, e.end(), 0.0) / per_period;
    return std::abs(last - first) / std::abs(first);
}

}  // namespace

TEST_CASE("modulation_frequency") {
    ModulationProtocol p{0.3, 4.0 * pi, 0.5};
    CHECK(modulation_frequency(p, p.t0) == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(std::abs(modulation_frequency(p, p.t0 + 10 * p.sigma_t) - 1.0) < 1e-21);
    CHECK(std::abs(modulation_frequency(p, p.t0 - 10 * p.sigma_t) - 1.0) < 1e-21);
    p.amplitude = 0.0;
    for (double t : {0.0, 1.0, 4.0 * pi, 100.0}) CHECK(modulation_frequency(p, t) == 1.0);

    p.amplitude = -1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.amplitude = 0.3;
    p.sigma_t = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("PropagatorConfig validation") {
    PropagatorConfig c;
    c.dt = 5e-3;
    c.t_end = 1.0;
    c.save_times = {0.0, 0.5, 1.0};
    CHECK_NOTHROW(c.validate(91.13));
    CHECK_THROWS_AS(c.validate(101.0), ConfigError);
    c.save_times = {0.5, 0.0};
    CHECK_THROWS_AS(c.validate(1.0), ConfigError);
    c.save_times = {0.0, 1.5};
    CHECK_THROWS_AS(c.validate(1.0), ConfigError);
    c.save_times = {};
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(1.0), ConfigError);
}

TEST_CASE("default grid time step resolves the fastest mode") {
    const double w = default_table().omega_max();
    CHECK(5e-3 * w <= 0.5);
}

TEST_CASE("gpe_step: box eigenstate only changes phase") {
    const Grid2D g = build_grid(10.0, 3.54, 8, 12);
    ComplexField2D f(g);
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
        for (std::size_t iy = 0; iy < g.ny(); ++iy) f(ix, iy) = std::sin(pi * double(iy + 1) / 13.0);
    }
    const double eps = 0.25 * std::pow(pi / 3.54, 2);
    const double dt = 5e-3;
    const ComplexField2D out = gpe_step(f, 0.0, 0.0, dt);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(out.values()[i] - f.values()[i] * std::polar(1.0, -eps * dt)) < 1e-12);
    }
}

TEST_CASE("gpe_step: harmonic eigenstate is stationary up to splitting error") {
    const Grid2D g = build_grid(10.0, 3.54, 8, 12);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(transverse_hamiltonian(g, 1.0));
    const double eps = eig.eigenvalues()(0);
    const ComplexField2D f = ComplexField2D::from_profile(g, eig.eigenvectors().col(0));
    const double dt = 5e-3;
    const ComplexField2D out = gpe_step(f, 1.0, 0.0, dt);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(out.values()[i] - f.values()[i] * std::polar(1.0, -eps * dt)) < 1e-6);
    }
    // in the frame rotating at mu = eps the phase stays put
    ComplexField2D h = f;
    const SplitStepPropagator prop(g, 0.0, eps, dt);
    for (int s = 0; s < 2000; ++s) prop.step(h, 1.0);
    // the discrete fixed point differs from the eigenstate at O(dt^2)
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        worst = std::max(worst, std::abs(h.values()[i] - f.values()[i]));
        scale = std::max(scale, std::abs(f.values()[i]));
    }
    CHECK(worst < dt * dt * scale);
}

TEST_CASE("gpe_step: norm change per step below 1e-12") {
    const GroundState& gs = default_state();
    ComplexField2D f = sample_initial_field(gs, default_table(), 5);
    const double n0 = f.norm();
    const SplitStepPropagator prop(gs.grid, gs.interaction, gs.mu, 5e-3);
    for (int s = 0; s < 50; ++s) {
        const double before = f.norm();
        prop.step(f, 1.3);
        CHECK(std::abs(f.norm() / before - 1.0) < 1e-12);
    }
    CHECK(std::abs(f.norm() / n0 - 1.0) < 1e-11);
}

TEST_CASE("Ehrenfest: displaced Gaussian oscillates at omega0") {
    // walls far away: Ly = 10 ell0, ground width 1/sqrt(2) ell0
    const Grid2D g = build_grid(10.0, 10.0, 8, 64);
    ComplexField2D f(g);
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
        for (std::size_t iy = 0; iy < g.ny(); ++iy) {
            const double y = g.y(iy) - 0.1;
            f(ix, iy) = std::exp(-y * y);
        }
    }
    const double dt = 5e-3;
    const SplitStepPropagator prop(g, 0.0, 0.0, dt);
    std::vector<double> crossings;
    double prev = centroid(f);
    const int steps = static_cast<int>(std::round(10.5 * 2.0 * pi / dt));
    for (int s = 1; s <= steps; ++s) {
        prop.step(f, 1.0);
        const double c = centroid(f);
        if (prev > 0.0 && c <= 0.0) crossings.push_back(dt * (s - 1 + prev / (prev - c)));
        prev = c;
    }
    REQUIRE(crossings.size() >= 10);
    const double period = (crossings.back() - crossings.front()) / double(crossings.size() - 1);
    CHECK(std::abs(2.0 * pi / period - 1.0) < 5e-3);
}

TEST_CASE("advance equals repeated step with the kick at step end points") {
    const GroundState& gs = small_state();
    const ModulationProtocol p{0.75, 0.3, 0.1};
    const SplitStepPropagator prop(gs.grid, gs.interaction, gs.mu, 5e-3);
    ComplexField2D a = sample_initial_field(gs, small_table(), 9);
    ComplexField2D b = a;
    prop.advance(a, 0.0, 200, p);
    // reference: Strang steps with the trap frequency at each half-kick time
    for (int s = 0; s < 200; ++s) {
        const double t0 = s * 5e-3;
        const double t1 = (s + 1) * 5e-3;
        const Grid2D& g = gs.grid;
        auto half = [&](double t) {
            const double w = modulation_frequency(p, t);
            for (std::size_t ix = 0; ix < g.nx(); ++ix) {
                for (std::size_t iy = 0; iy < g.ny(); ++iy) {
                    cplx& z = b(ix, iy);
                    const double y = g.y(iy);
                    const double v = w * w * y * y + gs.interaction * std::norm(z) - gs.mu;
                    z *= std::polar(1.0, -0.5 * 5e-3 * v);
                }
            }
        };
        half(t0);
        b = gpe_step(b, 0.0, 0.0, 5e-3, 0.0);
        half(t1);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]) / std::abs(b.values()[i]));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("sample_initial_field: zero betas give the condensate") {
    const GroundState& gs = small_state();
    const std::vector<cplx> zeros(small_table().modes.size());
    const ComplexField2D f = synthesize_field(gs, small_table(), zeros);
    const ComplexField2D phi = gs.field();
    for (std::size_t i = 0; i < f.values().size(); ++i) CHECK(f.values()[i] == phi.values()[i]);
}

TEST_CASE("sample_betas: vacuum statistics over 1000 draws") {
    const SpectrumTable& t = small_table();
    const std::size_t draws = 1000;
    std::vector<std::vector<cplx>> betas(draws);
    for (std::size_t r = 0; r < draws; ++r) betas[r] = sample_betas(t, trajectory_seed(42, r));
    const ModeMoments m = mode_moments(betas);
    std::size_t outside = 0, outside_re = 0, outside_im = 0, modes = 0;
    double mean_abs2 = 0.0;
    for (std::size_t i = 0; i < t.modes.size(); ++i) {
        if (t.modes[i].zero_mode) {
            for (const auto& b : betas) CHECK(b[i] == cplx{});
            continue;
        }
        ++modes;
        mean_abs2 += m.abs2[i].mean;
        outside += std::abs(m.abs2[i].mean - 0.5) > 0.05 ? 1 : 0;
        outside_re += std::abs(m.square_re[i].mean) > 0.05 ? 1 : 0;
        outside_im += std::abs(m.square_im[i].mean) > 0.05 ? 1 : 0;
    }
    // |b|^2, Re b^2 and Im b^2 all have standard deviation 1/2, so 0.05 is
    // ~3.2 standard errors at 1000 draws: ~2e-3 of the modes fall outside by chance
    CHECK(double(outside) / double(modes) < 0.01);
    CHECK(double(outside_re) / double(modes) < 0.01);
    CHECK(double(outside_im) / double(modes) < 0.01);
    CHECK(std::abs(mean_abs2 / double(modes) - 0.5) < 3.0 * 0.5 / std::sqrt(double(modes * draws)));
}

TEST_CASE("trajectory seeds are deterministic and distinct") {
    CHECK(trajectory_seed(1, 0) == trajectory_seed(1, 0));
    CHECK(trajectory_seed(1, 0) != trajectory_seed(1, 1));
    CHECK(trajectory_seed(1, 0) != trajectory_seed(2, 0));
    CHECK(sample_betas(small_table(), 7) == sample_betas(small_table(), 7));
}

TEST_CASE("ensemble evolution is independent of the worker count") {
    const GroundState& gs = small_state();
    const SpectrumTable& t = small_table();
    PropagatorConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 14.0;
    cfg.save_times = {0.0, 7.0, 14.0};
    const ModulationProtocol kick{0.75, 4.0 * pi, 0.25};

    std::vector<std::vector<ComplexField2D>> snapshots[2];
    for (int k = 0; k < 2; ++k) {
        EnsembleState ens = make_vacuum_ensemble(gs, t, 6, 99, k == 0 ? 1 : 3);
        evolve_ensemble(ens, gs, kick, cfg, [&](const EnsembleState& e) { snapshots[k].push_back(e.fields); },
                        k == 0 ? 1 : 3);
        CHECK(ens.t == 14.0);
    }
    REQUIRE(snapshots[0].size() == 3);
    REQUIRE(snapshots[1].size() == 3);
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t r = 0; r < 6; ++r) CHECK(snapshots[0][s][r].values() == snapshots[1][s][r].values());
    }
}

TEST_CASE("undriven vacuum stays at vacuum level") {
    const GroundState& gs = small_state();
    const SpectrumTable& t = small_table();
    PropagatorConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 10.0;
    cfg.save_times = {10.0};
    EnsembleState ens = make_vacuum_ensemble(gs, t, 400, 3);
    std::vector<std::vector<cplx>> betas;
    evolve_ensemble(ens, gs, ModulationProtocol{0.0, 4.0 * pi, 0.25}, cfg, [&](const EnsembleState& e) {
        for (const auto& f : e.fields) betas.push_back(project_all(f, gs, t));
    });
    for (const WindowSpec& w : default_windows(t)) {
        std::size_t count = 0;
        for (const auto& m : t.modes) count += w.contains(m) ? 1 : 0;
        const WindowPoint p = window_population(betas, t, w, 10.0);
        CHECK(std::abs(p.value) / double(count) < 0.05);
    }
}

TEST_CASE("static-trap conservation of norm and energy") {
    const GroundState& gs = small_state();
    const SpectrumTable& t = small_table();
    const double tb = 2.0 * pi / t.omega_b0;
    const std::size_t per_period = 16;
    PropagatorConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 150.0 * tb;
    for (std::size_t i = 0; i <= 150 * per_period; ++i) cfg.save_times.push_back(double(i) * tb / per_period);
    cfg.save_times.back() = cfg.t_end;
    EnsembleState ens = make_vacuum_ensemble(gs, t, 2, 5);
    const double n0 = ens.fields[0].norm();
    std::vector<double> energy;
    double norm_drift = 0.0;
    evolve_ensemble(ens, gs, ModulationProtocol{0.0, 4.0 * pi, 0.25}, cfg, [&](const EnsembleState& e) {
        energy.push_back(gpe_energy(e.fields[0], 1.0, gs.interaction));
        norm_drift = std::max(norm_drift, std::abs(e.fields[0].norm() / n0 - 1.0));
    });
    CHECK(norm_drift < 1e-9);
    // the last save is the end point; drop it so both windows span whole periods
    energy.pop_back();
    CHECK(averaged_energy_drift(energy, per_period) < 1e-6);
}

TEST_CASE("a non-finite trajectory aborts with its index and time") {
    const GroundState& gs = small_state();
    EnsembleState ens = make_vacuum_ensemble(gs, small_table(), 4, 1);
    ens.fields[2].values()[17] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    PropagatorConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 1.0;
    cfg.save_times = {1.0};
    try {
        evolve_ensemble(ens, gs, ModulationProtocol{}, cfg, [](const EnsembleState&) {});
        FAIL("expected BlowUpError");
    } catch (const BlowUpError& e) {
        CHECK(e.trajectory() == 2);
        CHECK(e.time() > 0.0);
        CHECK(e.time() <= 1.0);
    }
}

TEST_CASE("parametric resonance selects k_res") {
    // noise-free: condensate plus a classical seed in one g pair, then the kick
    const GroundState& gs = default_state();
    const SpectrumTable& t = default_table();
    const double tb = 2.0 * pi / t.omega_b0;
    const long n_res = std::lround(*t.k_res_g / gs.grid.dk());
    const ModulationProtocol kick{0.75, 4.0 * pi, 0.25};
    const SplitStepPropagator prop(gs.grid, gs.interaction, gs.mu, 5e-3);
    const auto steps = static_cast<std::size_t>(std::ceil((kick.t0 + 15.0 * tb) / 5e-3));

    auto growth = [&](long n) {
        std::vector<cplx> betas(t.modes.size());
        const std::size_t plus = t.mode_index(n, 0), minus = t.mode_index(-n, 0);
        REQUIRE(t.modes[plus].branch == Branch::goldstone());
        betas[plus] = betas[minus] = 1.0;
        ComplexField2D f = synthesize_field(gs, t, betas);
        prop.advance(f, 0.0, steps, kick);
        const auto out = project_all(f, gs, t);
        return std::norm(out[plus]) + std::norm(out[minus]);
    };
    const double resonant = growth(n_res);
    CHECK(resonant > 10.0);
    for (long n : {n_res - 12, n_res + 12, n_res / 2}) {
        CHECK(growth(n) < resonant);
    }
}
