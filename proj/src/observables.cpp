#include "preheat/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "preheat/errors.hpp"
#include "preheat/parallel.hpp"
#include "preheat/spectral.hpp"

namespace preheat {

Estimate estimate(std::span<const double> samples) {
    Estimate e;
    if (samples.empty()) {
        e.mean = std::numeric_limits<double>::quiet_NaN();
        e.stderr_ = e.mean;
        return e;
    }
    const double n = static_cast<double>(samples.size());
    e.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    if (samples.size() < 2) {
        e.stderr_ = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double ss = 0.0;
    for (double s : samples) ss += (s - e.mean) * (s - e.mean);
    e.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    return e;
}

namespace {

// Fluctuation field exp(-i theta) psi - phi, x-major.
std::vector<cplx> fluctuation(const ComplexField2D& field, const GroundState& gs) {
    const Grid2D& grid = gs.grid;
    if (!(field.grid() == grid)) throw ShapeError("field and ground state live on different grids");
    const std::size_t ny = grid.ny();
    const auto& psi = field.values();
    cplx overlap{};
    for (std::size_t i = 0; i < psi.size(); ++i) overlap += gs.phi(static_cast<Eigen::Index>(i % ny)) * psi[i];
    const cplx rot = std::abs(overlap) > 0.0 ? std::conj(overlap) / std::abs(overlap) : cplx{1.0};
    std::vector<cplx> delta(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        delta[i] = rot * psi[i] - gs.phi(static_cast<Eigen::Index>(i % ny));
    }
    return delta;
}

cplx project_coefficients(const std::vector<cplx>& coeff, const Grid2D& grid,
                          const BogoliubovMode& mode) {
    const std::size_t ny = grid.ny();
    const cplx* plus = coeff.data() + grid.slot(mode.n) * ny;
    const cplx* minus = coeff.data() + grid.slot(-mode.n) * ny;
    cplx beta{};
    for (std::size_t j = 0; j < ny; ++j) {
        const auto e = static_cast<Eigen::Index>(j);
        beta += mode.u(e) * plus[j] - mode.v(e) * std::conj(minus[j]);
    }
    return beta * (grid.dx() * grid.dy() / std::sqrt(grid.lx()));
}

}  // namespace

std::complex<double> project_mode(const ComplexField2D& field, const GroundState& gs,
                                  const BogoliubovMode& mode) {
    if (mode.zero_mode) throw DomainError("the Goldstone zero mode has no symplectic norm");
    auto coeff = fluctuation(field, gs);
    FourierX(gs.grid.nx(), gs.grid.ny()).forward(coeff.data());
    return project_coefficients(coeff, gs.grid, mode);
}

std::vector<std::complex<double>> project_all(const ComplexField2D& field, const GroundState& gs,
                                              const SpectrumTable& table) {
    if (!(table.grid == gs.grid)) throw ShapeError("spectrum table and ground state differ in grid");
    auto coeff = fluctuation(field, gs);
    FourierX(gs.grid.nx(), gs.grid.ny()).forward(coeff.data());
    std::vector<cplx> betas(table.modes.size());
    for (std::size_t i = 0; i < table.modes.size(); ++i) {
        if (!table.modes[i].zero_mode) betas[i] = project_coefficients(coeff, gs.grid, table.modes[i]);
    }
    return betas;
}

ModeMoments mode_moments(std::span<const std::vector<std::complex<double>>> betas) {
    ModeMoments m;
    if (betas.empty()) return m;
    const std::size_t modes = betas.front().size();
    for (const auto& b : betas) {
        if (b.size() != modes) throw ShapeError("projections of unequal length");
    }
    m.abs2.resize(modes);
    m.square.resize(modes);
    m.square_re.resize(modes);
    m.square_im.resize(modes);
    std::vector<double> a(betas.size());
    std::vector<double> re(betas.size());
    std::vector<double> im(betas.size());
    for (std::size_t i = 0; i < modes; ++i) {
        for (std::size_t r = 0; r < betas.size(); ++r) {
            const cplx b = betas[r][i];
            const cplx sq = b * b;
            a[r] = std::norm(b);
            re[r] = sq.real();
            im[r] = sq.imag();
        }
        m.abs2[i] = estimate(a);
        m.square_re[i] = estimate(re);
        m.square_im[i] = estimate(im);
        m.square[i] = {m.square_re[i].mean, m.square_im[i].mean};
    }
    return m;
}

std::vector<ModePopulationRecord> branch_momentum_distribution(
    std::span<const std::vector<std::complex<double>>> betas, const SpectrumTable& table, double t) {
    const ModeMoments m = mode_moments(betas);
    std::vector<ModePopulationRecord> out;
    if (m.abs2.size() != table.modes.size()) throw ShapeError("projections do not match the table");
    out.reserve(table.modes.size());
    for (std::size_t i = 0; i < table.modes.size(); ++i) {
        const BogoliubovMode& mode = table.modes[i];
        if (mode.zero_mode) continue;
        out.push_back({t, mode.branch, mode.n, mode.k, mode.transverse_index,
                       m.abs2[i].mean - 0.5, m.abs2[i].stderr_});
    }
    return out;
}

std::vector<ModePopulationRecord> branch_momentum_distribution(const EnsembleState& ens,
                                                               const GroundState& gs,
                                                               const SpectrumTable& table,
                                                               std::size_t threads) {
    std::vector<std::vector<cplx>> betas(ens.fields.size());
    parallel_for(ens.fields.size(), threads,
                 [&](std::size_t i) { betas[i] = project_all(ens.fields[i], gs, table); });
    return branch_momentum_distribution(betas, table, ens.t);
}

bool WindowSpec::contains(const BogoliubovMode& mode) const {
    if (mode.zero_mode || mode.branch != branch) return false;
    // absorbs rounding in k = n dk
    const double slack = 1e-9 * (half_width + std::abs(k_center) + 1.0);
    if (std::abs(mode.k - k_center) <= half_width + slack) return true;
    return k_center != 0.0 && std::abs(mode.k + k_center) <= half_width + slack;
}

void WindowSpec::validate(const SpectrumTable& table) const {
    if (!(half_width >= 0.0) || !std::isfinite(k_center)) {
        throw ConfigError("window '" + name + "' needs a finite center and non-negative width");
    }
    const double k_max = table.grid.dk() * static_cast<double>(table.grid.nx() / 2);
    if (std::abs(k_center) + half_width > k_max) {
        throw ConfigError("window '" + name + "' extends beyond the momentum grid");
    }
    const bool any = std::any_of(table.modes.begin(), table.modes.end(),
                                 [&](const BogoliubovMode& m) { return contains(m); });
    if (!any) throw ConfigError("window '" + name + "' contains no mode");
}

std::vector<WindowSpec> default_windows(const SpectrumTable& table, double spacings) {
    const double hw = spacings * table.grid.dk();
    std::vector<WindowSpec> out;
    if (table.k_res_g) out.push_back({"g", Branch::goldstone(), *table.k_res_g, hw});
    if (table.k_res_d) out.push_back({"d", Branch::dipole(), *table.k_res_d, hw});
    out.push_back({"b", Branch::breathing(), 0.0, hw});
    out.push_back({"b0", Branch::breathing(), 0.0, 0.0});
    return out;
}

std::vector<WindowPoint> integrated_window_population(std::span<const ModePopulationRecord> records,
                                                      const WindowSpec& window) {
    std::vector<WindowPoint> out;
    std::vector<double> var;
    std::vector<std::size_t> hits;
    for (const ModePopulationRecord& r : records) {
        if (out.empty() || out.back().t != r.t) {
            out.push_back({r.t, 0.0, 0.0});
            var.push_back(0.0);
            hits.push_back(0);
        }
        BogoliubovMode probe;
        probe.branch = r.branch;
        probe.k = r.k;
        if (!window.contains(probe)) continue;
        out.back().value += r.population;
        var.back() += r.stderr_ * r.stderr_;
        ++hits.back();
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (hits[i] == 0) throw ConfigError("window '" + window.name + "' contains no mode");
        out[i].stderr_ = std::sqrt(var[i]);
    }
    return out;
}

WindowPoint window_population(std::span<const std::vector<std::complex<double>>> betas,
                              const SpectrumTable& table, const WindowSpec& window, double t) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < table.modes.size(); ++i) {
        if (window.contains(table.modes[i])) members.push_back(i);
    }
    if (members.empty()) throw ConfigError("window '" + window.name + "' contains no mode");
    std::vector<double> sums(betas.size());
    for (std::size_t r = 0; r < betas.size(); ++r) {
        if (betas[r].size() != table.modes.size()) throw ShapeError("projections do not match the table");
        double s = 0.0;
        for (std::size_t i : members) s += std::norm(betas[r][i]) - 0.5;
        sums[r] = s;
    }
    const Estimate e = estimate(sums);
    return {t, e.mean, e.stderr_};
}

std::vector<double> transverse_width(const ComplexField2D& field) {
    const Grid2D& grid = field.grid();
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    std::vector<double> y2(ny);
    for (std::size_t j = 0; j < ny; ++j) y2[j] = grid.y(j) * grid.y(j);
    std::vector<double> w(nx);
    const auto& psi = field.values();
    for (std::size_t ix = 0; ix < nx; ++ix) {
        double den = 0.0;
        double num = 0.0;
        for (std::size_t j = 0; j < ny; ++j) {
            const double d = std::norm(psi[ix * ny + j]);
            den += d;
            num += d * y2[j];
        }
        if (!(den > 0.0) || !std::isfinite(num)) {
            throw DomainError("line density vanishes at x = " + std::to_string(grid.x(ix)));
        }
        w[ix] = num / den;
    }
    return w;
}

double mean_width(const EnsembleState& ens, std::size_t threads) {
    if (ens.fields.empty()) throw ConfigError("empty ensemble");
    std::vector<double> means(ens.fields.size());
    parallel_for(ens.fields.size(), threads, [&](std::size_t i) {
        const auto w = transverse_width(ens.fields[i]);
        means[i] = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    });
    return std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
}

namespace {

// Circular autocorrelation (1/Nx) sum_x d(x) d(x + s) for all s, via FFT.
std::vector<double> autocorrelation(const std::vector<double>& d, const FourierX& fft) {
    const std::size_t nx = d.size();
    std::vector<cplx> buf(d.begin(), d.end());
    fft.forward(buf.data());
    for (cplx& z : buf) z = std::norm(z);
    fft.backward(buf.data());
    std::vector<double> out(nx);
    const double scale = 1.0 / (static_cast<double>(nx) * static_cast<double>(nx));
    for (std::size_t s = 0; s < nx; ++s) out[s] = buf[s].real() * scale;
    return out;
}

std::vector<WidthCorrelationRecord> reduce_correlations(
    const std::vector<std::vector<double>>& per_traj, double dx,
    std::span<const std::size_t> shifts, double t) {
    std::vector<WidthCorrelationRecord> out;
    out.reserve(shifts.size());
    std::vector<double> samples(per_traj.size());
    for (std::size_t s : shifts) {
        for (std::size_t r = 0; r < per_traj.size(); ++r) {
            samples[r] = per_traj[r][s % per_traj[r].size()];
        }
        const Estimate e = estimate(samples);
        out.push_back({t, dx * static_cast<double>(s), s, e.mean, e.stderr_});
    }
    return out;
}

}  // namespace

std::vector<WidthCorrelationRecord> width_correlation(std::span<const std::vector<double>> widths,
                                                      double wbar0, double dx,
                                                      std::span<const std::size_t> shifts,
                                                      double t) {
    if (widths.empty()) throw ConfigError("empty ensemble");
    if (!(wbar0 > 0.0)) throw DomainError("reference width must be positive");
    const std::size_t nx = widths.front().size();
    const FourierX fft(nx, 1);
    std::vector<std::vector<double>> per_traj(widths.size());
    for (std::size_t r = 0; r < widths.size(); ++r) {
        if (widths[r].size() != nx) throw ShapeError("width profiles of unequal length");
        std::vector<double> d(nx);
        for (std::size_t i = 0; i < nx; ++i) d[i] = (widths[r][i] - wbar0) / wbar0;
        per_traj[r] = autocorrelation(d, fft);
    }
    return reduce_correlations(per_traj, dx, shifts, t);
}

std::vector<WidthCorrelationRecord> width_correlation(const EnsembleState& ens, double wbar0,
                                                      std::span<const std::size_t> shifts,
                                                      std::size_t threads) {
    if (ens.fields.empty()) throw ConfigError("empty ensemble");
    if (!(wbar0 > 0.0)) throw DomainError("reference width must be positive");
    const Grid2D& grid = ens.fields.front().grid();
    const FourierX fft(grid.nx(), 1);
    std::vector<std::vector<double>> per_traj(ens.fields.size());
    parallel_for(ens.fields.size(), threads, [&](std::size_t r) {
        auto d = transverse_width(ens.fields[r]);
        for (double& v : d) v = (v - wbar0) / wbar0;
        per_traj[r] = autocorrelation(d, fft);
    });
    return reduce_correlations(per_traj, grid.dx(), shifts, ens.t);
}

}  // namespace preheat
