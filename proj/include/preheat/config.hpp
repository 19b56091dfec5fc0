#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "preheat/bogoliubov.hpp"
#include "preheat/twa.hpp"

namespace preheat {

struct GridConfig {
    double lx = 140.0;
    double ly = 2.5032;
    std::size_t nx = 512;
    std::size_t ny = 12;
    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

/// Exactly one of mu_target and interaction is set.
struct PhysicsConfig {
    double atoms = 1e6;
    std::optional<double> mu_target = 2.38;
    std::optional<double> interaction;
    friend bool operator==(const PhysicsConfig&, const PhysicsConfig&) = default;
};

/// Times in 1/omega0. Unset t_end / save_every fall back to the *_periods keys,
/// counted in breathing periods 2 pi / omega_b0.
struct TimeConfig {
    double dt = 5e-3;
    std::optional<double> t_end;
    double t_end_periods = 150.0;
    std::optional<double> save_every;
    double save_every_periods = 0.125;
    friend bool operator==(const TimeConfig&, const TimeConfig&) = default;
};

struct EnsembleConfig {
    std::size_t trajectories = 1000;
    std::uint64_t master_seed = 1;
    friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

/// Partial override of a default window, or a new window when all fields are set.
struct WindowOverride {
    std::string name;
    std::optional<Branch> branch;
    std::optional<double> k_center;
    std::optional<double> half_width;
    friend bool operator==(const WindowOverride&, const WindowOverride&) = default;
};

struct OutputConfig {
    std::string directory = "out";
    bool populations = true;
    bool windows = true;
    bool correlations = true;
    /// populations.csv is written every this many save times.
    std::size_t population_every = 8;
    std::vector<Branch> population_branches{Branch::goldstone(), Branch::dipole(),
                                            Branch::breathing()};
    /// C_w separations are multiples of this many grid cells.
    std::size_t cw_stride = 4;
    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

/// Declared scan: each "section.key" axis takes each of its values
/// (cartesian product, first axis slowest).
struct ScanConfig {
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    friend bool operator==(const ScanConfig&, const ScanConfig&) = default;
};

/// Sectioned key = value text, all quantities in ell0, 1/omega0, hbar omega0:
///
///   [grid]      lx ly nx ny
///   [physics]   atoms, mu_target | interaction
///   [kick]      amplitude t0 sigma_t
///   [time]      dt, t_end | t_end_periods, save_every | save_every_periods
///   [ensemble]  trajectories master_seed
///   [windows]   half_width_spacings, <name>.branch <name>.k_center <name>.half_width
///   [output]    directory populations windows correlations population_every
///               population_branches cw_stride
///   [scan]      section.key = v1, v2, ...
struct ExperimentConfig {
    GridConfig grid;
    PhysicsConfig physics;
    ModulationProtocol kick;
    TimeConfig time;
    EnsembleConfig ensemble;
    double window_spacings = 6.0;
    std::vector<WindowOverride> windows;
    OutputConfig output;
    ScanConfig scan;

    /// Throws ConfigError on syntax errors, unknown keys or unparsable values.
    /// Ranges and shapes are left to validate().
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    /// Canonical text; parse(serialize()) reproduces the config exactly.
    std::string serialize() const;
    void validate() const;

    /// Copy with one "section.key" replaced by `value` (text form).
    ExperimentConfig with(const std::string& key, const std::string& value) const;
    /// Value of "section.key" in canonical text form, empty if absent.
    std::string get(const std::string& key) const;

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace preheat
