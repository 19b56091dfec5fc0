#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "preheat/bogoliubov.hpp"
#include "preheat/ground_state.hpp"
#include "preheat/lattice.hpp"
#include "preheat/twa.hpp"

namespace preheat {

/// Sample mean and its standard error (NaN for a single sample).
struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

Estimate estimate(std::span<const double> samples);

/// beta = int [u* dpsi - v* dpsi*] against one static mode, with
/// dpsi = exp(-i theta) psi - phi and theta = arg <phi|psi> removing the global
/// phase drift. Throws DomainError for the Goldstone zero mode.
std::complex<double> project_mode(const ComplexField2D& field, const GroundState& gs,
                                  const BogoliubovMode& mode);

/// Same projection for every entry of table.modes (zero mode -> 0), via one FFT.
std::vector<std::complex<double>> project_all(const ComplexField2D& field, const GroundState& gs,
                                              const SpectrumTable& table);

/// Per-mode <|beta|^2> and <beta^2> over an ensemble of projections.
struct ModeMoments {
    std::vector<Estimate> abs2;
    std::vector<std::complex<double>> square;
    std::vector<Estimate> square_re;
    std::vector<Estimate> square_im;
};

ModeMoments mode_moments(std::span<const std::vector<std::complex<double>>> betas);

struct ModePopulationRecord {
    double t = 0.0;
    Branch branch;
    long n = 0;
    double k = 0.0;
    std::size_t transverse_index = 0;
    /// <|beta|^2> - 1/2
    double population = 0.0;
    double stderr_ = 0.0;
};

/// Populations of every non-zero mode of the table at time t.
std::vector<ModePopulationRecord> branch_momentum_distribution(
    std::span<const std::vector<std::complex<double>>> betas, const SpectrumTable& table, double t);

std::vector<ModePopulationRecord> branch_momentum_distribution(const EnsembleState& ens,
                                                               const GroundState& gs,
                                                               const SpectrumTable& table,
                                                               std::size_t threads = 1);

struct WindowSpec {
    std::string name;
    Branch branch;
    double k_center = 0.0;
    double half_width = 0.0;

    /// Modes of the window: |k - kc| <= hw or |k + kc| <= hw (one window when kc = 0).
    bool contains(const BogoliubovMode& mode) const;
    /// Throws ConfigError when the window reaches outside the momentum grid or
    /// selects no mode of the table.
    void validate(const SpectrumTable& table) const;
};

/// Default windows: g and d at +-k_res, broadband b at k = 0, each +-6 grid
/// spacings wide, plus the single k = 0 breathing mode "b0".
std::vector<WindowSpec> default_windows(const SpectrumTable& table, double spacings = 6.0);

struct WindowPoint {
    double t = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Sums record populations inside the window at every distinct time. The
/// error column assumes independent modes, which understates it for pairs;
/// window_population gives the exact per-trajectory error.
std::vector<WindowPoint> integrated_window_population(std::span<const ModePopulationRecord> records,
                                                      const WindowSpec& window);

/// Window sum of |beta|^2 - 1/2 with its standard error from per-trajectory sums.
WindowPoint window_population(std::span<const std::vector<std::complex<double>>> betas,
                              const SpectrumTable& table, const WindowSpec& window, double t);

/// w(x) = sum_y |psi|^2 y^2 / sum_y |psi|^2 with y from the trap center.
/// Throws DomainError where the line density vanishes.
std::vector<double> transverse_width(const ComplexField2D& field);

/// Ensemble mean of the spatial mean of w.
double mean_width(const EnsembleState& ens, std::size_t threads = 1);

struct WidthCorrelationRecord {
    double t = 0.0;
    double x = 0.0;
    std::size_t shift = 0;
    double cw = 0.0;
    double stderr_ = 0.0;
};

/// C_w(X) = < dw(x) dw(x + X) >_{x, W} / wbar0^2 with dw = w - wbar0, for
/// X = shift * dx. Shifts are taken modulo Nx.
std::vector<WidthCorrelationRecord> width_correlation(std::span<const std::vector<double>> widths,
                                                      double wbar0, double dx,
                                                      std::span<const std::size_t> shifts,
                                                      double t);

std::vector<WidthCorrelationRecord> width_correlation(const EnsembleState& ens, double wbar0,
                                                      std::span<const std::size_t> shifts,
                                                      std::size_t threads = 1);

}  // namespace preheat
