#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "preheat/errors.hpp"
#include "preheat/observables.hpp"
#include "preheat/twa.hpp"
#include "support.hpp"

using namespace testing;

namespace {

std::vector<std::vector<cplx>> vacuum_projections(std::size_t draws, std::uint64_t seed) {
    const GroundState& gs = small_state();
    const SpectrumTable& t = small_table();
    std::vector<std::vector<cplx>> out(draws);
    for (std::size_t r = 0; r < draws; ++r) {
        out[r] = project_all(sample_initial_field(gs, t, trajectory_seed(seed, r)), gs, t);
    }
    return out;
}

}  // namespace

TEST_CASE("estimate") {
    const std::vector<double> one{2.0};
    CHECK(estimate(one).mean == 2.0);
    CHECK(std::isnan(estimate(one).stderr_));
    const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    CHECK(estimate(s).mean == doctest::Approx(2.5));
    // sample std 1.2910, over sqrt(4)
    CHECK(estimate(s).stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("projection of the condensate is zero") {
    const GroundState& gs = default_state();
    const SpectrumTable& t = default_table();
    const auto betas = project_all(gs.field(), gs, t);
    double worst = 0.0;
    for (auto b : betas) worst = std::max(worst, std::abs(b));
    CHECK(worst < 1e-12);
    CHECK(std::abs(project_mode(gs.field(), gs, *t.find(3, Branch::dipole()))) < 1e-12);
}

TEST_CASE("single-mode round trip recovers beta = 0.3") {
    const GroundState& gs = default_state();
    const SpectrumTable& t = default_table();
    const std::vector<std::size_t> picks{t.mode_index(0, 2), t.mode_index(43, 0), t.mode_index(-17, 1),
                                        t.mode_index(5, 4), t.mode_index(256, 0)};
    for (std::size_t pick : picks) {
        for (cplx beta : {cplx{0.3, 0.0}, cplx{0.0, 0.3}}) {
            std::vector<cplx> betas(t.modes.size());
            betas[pick] = beta;
            const ComplexField2D f = synthesize_field(gs, t, betas);
            const auto out = project_all(f, gs, t);
            double others = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) {
                if (i != pick) others = std::max(others, std::abs(out[i]));
            }
            CHECK(std::abs(out[pick] - beta) < 1e-10);
            CHECK(others < 1e-10);
            CHECK(std::abs(project_mode(f, gs, t.modes[pick]) - beta) < 1e-10);
        }
    }
}

TEST_CASE("projection onto the zero mode is rejected") {
    const GroundState& gs = small_state();
    const BogoliubovMode* zero = small_table().find(0, Branch::goldstone());
    REQUIRE(zero->zero_mode);
    CHECK_THROWS_AS(project_mode(gs.field(), gs, *zero), DomainError);
}

TEST_CASE("vacuum projections: <|beta|^2> = 1/2 and populations 0") {
    const SpectrumTable& t = small_table();
    const auto betas = vacuum_projections(1000, 17);
    const auto records = branch_momentum_distribution(betas, t, 0.0);
    REQUIRE(records.size() == t.modes.size() - 1);
    std::size_t outside = 0;
    for (const ModePopulationRecord& r : records) outside += std::abs(r.population) > 0.05 ? 1 : 0;
    // 0.05 is ~3.2 standard errors per mode; chance exceedances are ~2e-3 of modes
    CHECK(double(outside) / double(records.size()) < 0.01);

    const ModeMoments m = mode_moments(betas);
    std::size_t outside_square = 0;
    for (std::size_t i = 0; i < t.modes.size(); ++i) {
        if (t.modes[i].zero_mode) continue;
        outside_square += std::abs(m.square_re[i].mean) > 0.05 || std::abs(m.square_im[i].mean) > 0.05;
    }
    CHECK(double(outside_square) / double(records.size()) < 0.02);
}

TEST_CASE("window integration") {
    const SpectrumTable& t = small_table();
    const auto betas = vacuum_projections(400, 23);
    const auto records = branch_momentum_distribution(betas, t, 0.0);
    const auto windows = default_windows(t);
    REQUIRE(windows.size() == 4);
    CHECK(windows[0].name == "g");
    CHECK(windows[0].k_center == *t.k_res_g);
    CHECK(windows[0].half_width == doctest::Approx(6.0 * t.grid.dk()));
    CHECK(windows[1].name == "d");
    CHECK(windows[2].name == "b");
    CHECK(windows[2].k_center == 0.0);
    CHECK(windows[3].name == "b0");
    CHECK(windows[3].half_width == 0.0);

    for (const WindowSpec& w : windows) {
        std::size_t count = 0;
        for (const auto& m : t.modes) count += w.contains(m) ? 1 : 0;
        const auto series = integrated_window_population(records, w);
        REQUIRE(series.size() == 1);
        const WindowPoint exact = window_population(betas, t, w, 0.0);
        CHECK(std::abs(series[0].value) <= 0.05 * double(count));
        CHECK(series[0].value == doctest::Approx(exact.value).epsilon(1e-9));
    }

    WindowSpec empty{"x", Branch::dipole(), 0.5 * t.grid.dk(), 0.1 * t.grid.dk()};
    CHECK_THROWS_AS(empty.validate(t), ConfigError);
    CHECK_THROWS_AS(integrated_window_population(records, empty), ConfigError);
    WindowSpec outside{"y", Branch::goldstone(), 30.0 * t.grid.dk(), 6.0 * t.grid.dk()};
    CHECK_THROWS_AS(outside.validate(t), ConfigError);
}

TEST_CASE("window contains both signs of k") {
    WindowSpec w{"g", Branch::goldstone(), 1.0, 0.2};
    BogoliubovMode m;
    m.branch = Branch::goldstone();
    m.k = -1.1;
    CHECK(w.contains(m));
    m.k = 0.7;
    CHECK_FALSE(w.contains(m));
    m.k = 1.2;
    m.branch = Branch::dipole();
    CHECK_FALSE(w.contains(m));
}

TEST_CASE("populations are even in k after a kick") {
    const GroundState& gs = small_state();
    const SpectrumTable& t = small_table();
    EnsembleState ens = make_vacuum_ensemble(gs, t, 300, 4);
    PropagatorConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 30.0;
    cfg.save_times = {30.0};
    evolve_ensemble(ens, gs, ModulationProtocol{0.75, 4.0 * pi, 0.25}, cfg, [](const EnsembleState&) {});
    const auto records = branch_momentum_distribution(ens, gs, t);
    std::size_t pairs = 0, outside = 0;
    for (const ModePopulationRecord& r : records) {
        if (r.n <= 0 || r.n == long(t.grid.nx() / 2)) continue;
        const ModePopulationRecord& mirror = records[t.mode_index(-r.n, r.transverse_index)];
        REQUIRE(mirror.n == -r.n);
        ++pairs;
        const double se = std::hypot(r.stderr_, mirror.stderr_);
        outside += std::abs(r.population - mirror.population) > 3.0 * se ? 1 : 0;
    }
    // independent pairs exceed 3 combined errors with probability 0.0027
    CHECK(double(outside) / double(pairs) < 0.01);
}

TEST_CASE("transverse width of the condensate is uniform") {
    const ComplexField2D phi = default_state().field();
    const auto w = transverse_width(phi);
    for (double v : w) CHECK(v == w.front());
}

TEST_CASE("transverse width of the harmonic ground state is ell0^2 / 4") {
    const Grid2D g = build_grid(10.0, 10.0, 8, 64);
    const GroundState gs = solve_ground_state(g, TrapPotential{1.0, 10.0}, 10.0, 0.0);
    for (double v : transverse_width(gs.field())) CHECK(v == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("default ground-state width against a refined-grid quadrature") {
    const GroundState& gs = default_state();
    // Ny = 25 interior points: dy halves and every coarse point is kept
    const Grid2D fine = build_grid(140.0, 2.5032, 512, 25);
    const GroundState ref = solve_ground_state(fine, TrapPotential{1.0, 2.5032}, 1e6, gs.interaction);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < fine.ny(); ++j) {
        const double y = -0.5 * 2.5032 + double(j + 1) * 2.5032 / 26.0;
        num += ref.phi(j) * ref.phi(j) * y * y;
        den += ref.phi(j) * ref.phi(j);
    }
    CHECK(rel(transverse_width(gs.field()).front(), num / den) < 0.01);
}

TEST_CASE("transverse width needs a nonzero line density") {
    const Grid2D g = build_grid(10.0, 3.54, 8, 4);
    ComplexField2D f(g, std::vector<cplx>(g.size(), cplx{1.0, 0.0}));
    for (std::size_t iy = 0; iy < g.ny(); ++iy) f(3, iy) = 0.0;
    CHECK_THROWS_AS(transverse_width(f), DomainError);
}

TEST_CASE("width correlation of a uniform offset is 0.01") {
    const std::size_t nx = 64;
    const double wbar0 = 0.37;
    std::vector<std::vector<double>> widths(5, std::vector<double>(nx, 1.1 * wbar0));
    std::vector<std::size_t> shifts;
    for (std::size_t s = 0; s <= nx / 2; ++s) shifts.push_back(s);
    const auto c = width_correlation(widths, wbar0, 0.5, shifts, 2.0);
    REQUIRE(c.size() == shifts.size());
    for (const auto& r : c) {
        CHECK(r.cw == doctest::Approx(0.01).epsilon(1e-12));
        CHECK(r.t == 2.0);
        CHECK(r.x == doctest::Approx(0.5 * double(r.shift)));
    }
}

TEST_CASE("width correlation: ring symmetry and the C_w(0) bound") {
    const std::size_t nx = 64;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n;
    std::vector<std::vector<double>> widths(50, std::vector<double>(nx));
    for (auto& w : widths) {
        const double a = n(rng), b = n(rng);
        for (std::size_t i = 0; i < nx; ++i) w[i] = 1.0 + 0.05 * (a * std::cos(2 * pi * 3 * i / nx) + b) + 0.01 * n(rng);
    }
    std::vector<std::size_t> shifts;
    for (std::size_t s = 0; s < nx; ++s) shifts.push_back(s);
    const auto c = width_correlation(widths, 1.0, 1.0, shifts, 0.0);
    for (std::size_t s = 1; s < nx; ++s) {
        CHECK(c[s].cw == doctest::Approx(c[nx - s].cw).epsilon(1e-10));
        CHECK(std::abs(c[s].cw) <= c[0].cw + 3.0 * c[0].stderr_);
    }
    CHECK(c[0].cw > 0.0);
}

TEST_CASE("vacuum width correlations are small") {
    const GroundState& gs = small_state();
    const EnsembleState ens = make_vacuum_ensemble(gs, small_table(), 200, 12);
    const double wbar0 = mean_width(ens);
    CHECK(wbar0 == doctest::Approx(transverse_width(gs.field()).front()).epsilon(1e-3));
    std::vector<std::size_t> shifts{0, 1, 8, 16, 32};
    for (const auto& r : width_correlation(ens, wbar0, shifts)) CHECK(std::abs(r.cw) < 1e-3);
}
