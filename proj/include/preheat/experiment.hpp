#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "preheat/bogoliubov.hpp"
#include "preheat/config.hpp"
#include "preheat/ground_state.hpp"
#include "preheat/manifest.hpp"
#include "preheat/observables.hpp"

namespace preheat {

struct CommandOptions {
    /// Output directory; empty means the config's output.directory.
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    /// spectrum: also write the brute-force spectrum_oracle.csv.
    bool oracle = false;
    /// Progress messages; null for silence.
    std::ostream* log = nullptr;
};

/// Reads an experiment config, or the config echoed inside a run manifest
/// when the file ends in .json.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Ground state of the configured system (calibrating U when mu_target is set).
GroundState prepare_ground_state(const ExperimentConfig& config);

/// Default windows with the config's overrides applied, validated against the table.
std::vector<WindowSpec> resolve_windows(const ExperimentConfig& config, const SpectrumTable& table);

/// Run length and save interval in 1/omega0.
double resolved_t_end(const ExperimentConfig& config, double omega_b0);
double resolved_save_every(const ExperimentConfig& config, double omega_b0);
std::vector<double> save_schedule(double t_end, double save_every);

struct RunResult {
    std::filesystem::path directory;
    RunManifest manifest;
    double breathing_period = 0.0;
    std::vector<WindowSpec> windows;
    std::map<std::string, std::vector<WindowPoint>> window_series;
    /// C_w(0) and C_w(Lx/2) at every save.
    std::vector<WidthCorrelationRecord> cw_center;
    std::vector<WidthCorrelationRecord> cw_half;
};

RunManifest cmd_ground_state(const ExperimentConfig& config, const CommandOptions& options);
RunManifest cmd_spectrum(const ExperimentConfig& config, const CommandOptions& options);
/// Full pipeline. On a trajectory blow-up the rows saved so far stay on disk,
/// the manifest records the failure point and the BlowUpError is rethrown.
RunResult cmd_run(const ExperimentConfig& config, const CommandOptions& options);

/// One config with [scan] axes is expanded into its points; several configs
/// must differ only in the axes declared by the first. Every point runs into
/// out/point_<i>; comparison.csv joins the window series keyed by scan values.
std::vector<RunResult> cmd_scan(const std::vector<ExperimentConfig>& configs,
                                const CommandOptions& options);

/// Expanded scan points with the scan section removed, and their axis values.
struct ScanPoint {
    ExperimentConfig config;
    std::vector<std::pair<std::string, std::string>> values;
};
std::vector<ScanPoint> expand_scan(const std::vector<ExperimentConfig>& configs);

/// 0 success, 2 configuration, 3 numerical, 4 infeasible calibration, 1 other.
int exit_code_for(const std::exception& e);

}  // namespace preheat
