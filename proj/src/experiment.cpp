#include "preheat/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "preheat/bogoliubov_oracle.hpp"
#include "preheat/errors.hpp"
#include "preheat/parallel.hpp"

#ifndef PREHEAT_VERSION
#define PREHEAT_VERSION "unknown"
#endif

namespace preheat {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& columns)
        : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw std::runtime_error("cannot create '" + path.string() + "'");
        row(columns);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void flush() {
        out_.flush();
        if (!out_) throw std::runtime_error("CSV write failed");
    }

private:
    std::ofstream out_;
};

void log_line(const CommandOptions& o, const std::string& msg) {
    if (o.log) *o.log << msg << std::endl;
}

fs::path output_dir(const ExperimentConfig& c, const CommandOptions& o) {
    fs::path dir = o.out.empty() ? fs::path(c.output.directory) : o.out;
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig effective_config(ExperimentConfig c, const CommandOptions& o) {
    if (o.seed) c.ensemble.master_seed = *o.seed;
    c.validate();
    return c;
}

RunManifest start_manifest(const std::string& command, const ExperimentConfig& c) {
    RunManifest m;
    m.command = command;
    m.version = PREHEAT_VERSION;
    m.config = c.serialize();
    m.master_seed = c.ensemble.master_seed;
    m.started = utc_timestamp();
    return m;
}

void finish_manifest(RunManifest& m, const fs::path& dir, const std::string& status) {
    m.status = status;
    m.finished = utc_timestamp();
    m.write(dir / "manifest.json");
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json ground_state_json(const GroundState& gs) {
    return {{"interaction", gs.interaction},
            {"mu", gs.mu},
            {"atoms", gs.atoms},
            {"line_density", gs.line_density()},
            {"residual", gs.residual},
            {"iterations", gs.iterations},
            {"single_particle_ground_energy", single_particle_ground_energy(gs.grid, gs.omega_t)}};
}

json spectrum_json(const SpectrumTable& table) {
    const double dk = table.grid.dk();
    auto mode_number = [&](const std::optional<double>& k) {
        return k ? json(*k / dk) : json(nullptr);
    };
    return {{"omega_b0", table.omega_b0},
            {"breathing_period", 2.0 * std::numbers::pi / table.omega_b0},
            {"k_res_g", optional_json(table.k_res_g)},
            {"k_res_d", optional_json(table.k_res_d)},
            {"n_res_g", mode_number(table.k_res_g)},
            {"n_res_d", mode_number(table.k_res_d)},
            {"dk", dk},
            {"omega_max", table.omega_max()},
            {"ambiguous_mode_numbers", table.ambiguous}};
}

void write_sidecar(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

}  // namespace

ExperimentConfig load_config(const fs::path& path) {
    if (path.extension() == ".json") return ExperimentConfig::parse(RunManifest::read(path).config);
    return ExperimentConfig::load(path);
}

GroundState prepare_ground_state(const ExperimentConfig& c) {
    const Grid2D grid = build_grid(c.grid.lx, c.grid.ly, c.grid.nx, c.grid.ny);
    const TrapPotential trap{1.0, grid.ly()};
    if (c.physics.mu_target) return solve_at_chemical_potential(grid, trap, c.physics.atoms, *c.physics.mu_target);
    return solve_ground_state(grid, trap, c.physics.atoms, *c.physics.interaction);
}

std::vector<WindowSpec> resolve_windows(const ExperimentConfig& c, const SpectrumTable& table) {
    std::vector<WindowSpec> windows = default_windows(table, c.window_spacings);
    for (const WindowOverride& o : c.windows) {
        auto it = std::find_if(windows.begin(), windows.end(),
                               [&](const WindowSpec& w) { return w.name == o.name; });
        if (it == windows.end()) {
            if (!o.branch || !o.k_center || !o.half_width) {
                throw ConfigError("window '" + o.name +
                                  "' is new and needs branch, k_center and half_width");
            }
            windows.push_back({o.name, *o.branch, *o.k_center, *o.half_width});
            continue;
        }
        if (o.branch) it->branch = *o.branch;
        if (o.k_center) it->k_center = *o.k_center;
        if (o.half_width) it->half_width = *o.half_width;
    }
    for (const WindowSpec& w : windows) w.validate(table);
    return windows;
}

double resolved_t_end(const ExperimentConfig& c, double omega_b0) {
    return c.time.t_end ? *c.time.t_end : c.time.t_end_periods * 2.0 * std::numbers::pi / omega_b0;
}

double resolved_save_every(const ExperimentConfig& c, double omega_b0) {
    return c.time.save_every ? *c.time.save_every
                             : c.time.save_every_periods * 2.0 * std::numbers::pi / omega_b0;
}

std::vector<double> save_schedule(double t_end, double save_every) {
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor(t_end / save_every + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) out.push_back(static_cast<double>(i) * save_every);
    return out;
}

RunManifest cmd_ground_state(const ExperimentConfig& config, const CommandOptions& options) {
    const ExperimentConfig c = effective_config(config, options);
    const fs::path dir = output_dir(c, options);
    RunManifest m = start_manifest("ground-state", c);
    const GroundState gs = prepare_ground_state(c);
    log_line(options, "ground state: U = " + num(gs.interaction) + ", mu = " + num(gs.mu));

    {
        CsvWriter csv(dir / "ground_state.csv", {"iy", "y", "phi", "density"});
        for (std::size_t j = 0; j < gs.grid.ny(); ++j) {
            const double phi = gs.phi(static_cast<Eigen::Index>(j));
            csv.row({std::to_string(j), num(gs.grid.y(j)), num(phi), num(phi * phi)});
        }
        csv.flush();
    }
    m.derived = ground_state_json(gs);
    const auto w = transverse_width(gs.field());
    m.derived["mean_width"] = w.front();
    m.derived["sound_speed"] = compressibility_sound_speed(gs);
    m.record_file(dir, "ground_state.csv");
    finish_manifest(m, dir, "complete");
    return m;
}

namespace {

void write_spectrum_csv(const fs::path& path, const std::vector<std::string>& branch,
                        const std::vector<long>& n, const std::vector<double>& k,
                        const std::vector<double>& omega) {
    CsvWriter csv(path, {"branch", "n", "k", "omega"});
    for (std::size_t i = 0; i < branch.size(); ++i) {
        csv.row({branch[i], std::to_string(n[i]), num(k[i]), num(omega[i])});
    }
    csv.flush();
}

}  // namespace

RunManifest cmd_spectrum(const ExperimentConfig& config, const CommandOptions& options) {
    const ExperimentConfig c = effective_config(config, options);
    const fs::path dir = output_dir(c, options);
    RunManifest m = start_manifest("spectrum", c);
    const GroundState gs = prepare_ground_state(c);
    const SpectrumTable table = build_spectrum_table(gs, options.threads);

    std::vector<std::string> branch;
    std::vector<long> n;
    std::vector<double> k;
    std::vector<double> omega;
    for (const BogoliubovMode& mode : table.modes) {
        branch.push_back(mode.branch.name());
        n.push_back(mode.n);
        k.push_back(mode.k);
        omega.push_back(mode.omega);
    }
    write_spectrum_csv(dir / "spectrum.csv", branch, n, k, omega);
    m.derived = ground_state_json(gs);
    m.derived.update(spectrum_json(table));
    m.record_file(dir, "spectrum.csv");

    if (options.oracle) {
        if (gs.grid.size() > 1024) {
            throw ConfigError("--oracle is limited to grids with at most 1024 points");
        }
        branch.clear();
        n.clear();
        k.clear();
        omega.clear();
        for (const OracleMode& mode : brute_force_spectrum(gs)) {
            branch.push_back(mode.branch.name());
            n.push_back(mode.n);
            k.push_back(mode.k);
            omega.push_back(mode.omega);
        }
        write_spectrum_csv(dir / "spectrum_oracle.csv", branch, n, k, omega);
        m.record_file(dir, "spectrum_oracle.csv");
    }
    finish_manifest(m, dir, "complete");
    return m;
}

RunResult cmd_run(const ExperimentConfig& config, const CommandOptions& options) {
    const ExperimentConfig c = effective_config(config, options);
    RunResult result;
    result.directory = output_dir(c, options);
    const fs::path& dir = result.directory;
    RunManifest& m = result.manifest;
    m = start_manifest("run", c);

    const GroundState gs = prepare_ground_state(c);
    const SpectrumTable table = build_spectrum_table(gs, options.threads);
    const double tb = 2.0 * std::numbers::pi / table.omega_b0;
    result.breathing_period = tb;
    result.windows = resolve_windows(c, table);

    PropagatorConfig prop;
    prop.dt = c.time.dt;
    prop.t_end = resolved_t_end(c, table.omega_b0);
    prop.save_times = save_schedule(prop.t_end, resolved_save_every(c, table.omega_b0));
    prop.validate(table.omega_max());

    const std::size_t nx = gs.grid.nx();
    std::vector<std::size_t> shifts;
    for (std::size_t s = 0; s <= nx / 2; s += c.output.cw_stride) shifts.push_back(s);
    if (shifts.back() != nx / 2) shifts.push_back(nx / 2);

    std::size_t sampled = 0;
    for (const auto& mode : table.modes) sampled += mode.zero_mode ? 0 : 1;

    m.derived = ground_state_json(gs);
    m.derived.update(spectrum_json(table));
    m.derived["t_end"] = prop.t_end;
    m.derived["save_count"] = prop.save_times.size();
    json& kick = m.derived["kick"];
    kick = {{"amplitude", c.kick.amplitude},
            {"t0", c.kick.t0},
            {"sigma_t", c.kick.sigma_t},
            {"t0_omega0_periods", c.kick.t0 / (2.0 * std::numbers::pi)},
            {"t0_breathing_periods", c.kick.t0 / tb}};

    json windows_meta = json::array();
    for (const WindowSpec& w : result.windows) {
        std::size_t count = 0;
        for (const auto& mode : table.modes) count += w.contains(mode) ? 1 : 0;
        windows_meta.push_back({{"name", w.name},
                                {"branch", w.branch.name()},
                                {"k_center", w.k_center},
                                {"half_width", w.half_width},
                                {"k_ranges", w.k_center == 0.0
                                                 ? json::array({json::array({-w.half_width, w.half_width})})
                                                 : json::array({json::array({-w.k_center - w.half_width,
                                                                             -w.k_center + w.half_width}),
                                                                json::array({w.k_center - w.half_width,
                                                                             w.k_center + w.half_width})})},
                                {"modes", count}});
    }
    m.metadata = {
        {"time_normalizations",
         {{"t", "1/omega0"},
          {"tau0", "omega0 t / 2 pi"},
          {"taub", "omega_b0 t / 2 pi"},
          {"breathing_period", tb}}},
        {"windows", windows_meta},
        {"seeding", "trajectory seed = splitmix64(master_seed ^ splitmix64(index)), mt19937_64"},
        {"projection",
         "static t = 0 Bogoliubov basis; field phase-aligned to the condensate before projecting"},
        {"population_definition", "<|beta|^2>_W - 1/2"},
        {"cw_reference_width", nullptr},
        {"virtual_particles",
         {{"sampled_modes", sampled},
          {"mean_added_atoms", 0.5 * static_cast<double>(sampled)},
          {"ratio_to_atoms", 0.5 * static_cast<double>(sampled) / gs.atoms},
          {"note", "TWA vacuum sampling adds about M/2 atoms; not negligible when the ratio is "
                   "not small (e.g. N = 1e4)"}}},
    };

    log_line(options, "run: U = " + num(gs.interaction) + ", omega_b0 = " + num(table.omega_b0) +
                          ", t_end = " + num(prop.t_end) + ", " +
                          std::to_string(c.ensemble.trajectories) + " trajectories");
    m.write(dir / "manifest.json");

    EnsembleState ens = make_vacuum_ensemble(gs, table, c.ensemble.trajectories,
                                             c.ensemble.master_seed, options.threads);
    const double wbar0 = mean_width(ens, options.threads);
    m.metadata["cw_reference_width"] = wbar0;
    std::vector<double> norm0(ens.fields.size());
    for (std::size_t i = 0; i < norm0.size(); ++i) norm0[i] = ens.fields[i].norm();
    double norm_drift = 0.0;

    std::optional<CsvWriter> populations;
    std::optional<CsvWriter> windows;
    std::optional<CsvWriter> cw;
    const std::vector<std::string> times{"tau0", "taub"};
    if (c.output.populations) {
        populations.emplace(dir / "populations.csv",
                            std::vector<std::string>{"t", "branch", "n", "k", "population", "stderr",
                                                     "r", "tau0", "taub"});
    }
    if (c.output.windows) {
        windows.emplace(dir / "windows.csv",
                        std::vector<std::string>{"t", "window", "value", "stderr", "tau0", "taub"});
    }
    if (c.output.correlations) {
        cw.emplace(dir / "cw.csv", std::vector<std::string>{"t", "X", "C_w", "stderr", "tau0", "taub"});
    }

    std::size_t save_index = 0;
    double last_saved = -1.0;
    std::optional<double> post_kick_b0;
    const double settle = c.kick.t0 + 4.0 * c.kick.sigma_t;
    const auto b0 = std::find_if(result.windows.begin(), result.windows.end(),
                                 [](const WindowSpec& w) { return w.name == "b0"; });

    const Recorder recorder = [&](const EnsembleState& e) {
        const std::string t = num(e.t);
        const std::string tau0 = num(e.t / (2.0 * std::numbers::pi));
        const std::string taub = num(e.t / tb);
        const bool want_populations = populations && save_index % c.output.population_every == 0;

        std::vector<std::vector<cplx>> betas(e.fields.size());
        parallel_for(e.fields.size(), options.threads,
                     [&](std::size_t i) { betas[i] = project_all(e.fields[i], gs, table); });

        for (const WindowSpec& w : result.windows) {
            const WindowPoint p = window_population(betas, table, w, e.t);
            result.window_series[w.name].push_back(p);
            if (windows) windows->row({t, w.name, num(p.value), num(p.stderr_), tau0, taub});
            if (b0 != result.windows.end() && w.name == b0->name && e.t >= settle &&
                e.t <= settle + tb) {
                post_kick_b0 = std::max(post_kick_b0.value_or(p.value), p.value);
            }
        }
        if (want_populations) {
            for (const ModePopulationRecord& r : branch_momentum_distribution(betas, table, e.t)) {
                const auto& keep = c.output.population_branches;
                if (std::find(keep.begin(), keep.end(), r.branch) == keep.end()) continue;
                populations->row({t, r.branch.name(), std::to_string(r.n), num(r.k),
                                  num(r.population), num(r.stderr_), std::to_string(r.transverse_index),
                                  tau0, taub});
            }
        }
        for (std::size_t i = 0; i < norm0.size(); ++i) {
            norm_drift = std::max(norm_drift, std::abs(e.fields[i].norm() / norm0[i] - 1.0));
        }
        const auto corr = width_correlation(e, wbar0, shifts, options.threads);
        result.cw_center.push_back(corr.front());
        result.cw_half.push_back(corr.back());
        if (cw) {
            for (const WidthCorrelationRecord& r : corr) {
                cw->row({t, num(r.x), num(r.cw), num(r.stderr_), tau0, taub});
            }
        }
        for (auto* w : {&populations, &windows, &cw}) {
            if (*w) (*w)->flush();
        }
        last_saved = e.t;
        ++save_index;
        if (options.log && (save_index % 64 == 0 || save_index == prop.save_times.size())) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "  t = %.2f of %.2f (%.1f breathing periods)", e.t,
                          prop.t_end, e.t / tb);
            *options.log << buf << std::endl;
        }
    };

    auto close_outputs = [&] {
        populations.reset();
        windows.reset();
        cw.reset();
        json sidecar = {{"config", m.config},
                        {"master_seed", c.ensemble.master_seed},
                        {"trajectories", c.ensemble.trajectories},
                        {"breathing_period", tb},
                        {"omega_b0", table.omega_b0},
                        {"windows", windows_meta},
                        {"number_format", "%.16e"}};
        if (c.output.populations) {
            sidecar["columns"] = "t,branch,n,k,population,stderr,r,tau0,taub";
            sidecar["branches"] = json::array();
            for (Branch b : c.output.population_branches) sidecar["branches"].push_back(b.name());
            sidecar["every_saves"] = c.output.population_every;
            write_sidecar(dir / "populations.csv.json", sidecar);
            sidecar.erase("branches");
            sidecar.erase("every_saves");
            m.record_file(dir, "populations.csv");
            m.record_file(dir, "populations.csv.json");
        }
        if (c.output.windows) {
            sidecar["columns"] = "t,window,value,stderr,tau0,taub";
            write_sidecar(dir / "windows.csv.json", sidecar);
            m.record_file(dir, "windows.csv");
            m.record_file(dir, "windows.csv.json");
        }
        if (c.output.correlations) {
            sidecar["columns"] = "t,X,C_w,stderr,tau0,taub";
            sidecar["reference_width"] = wbar0;
            sidecar["shifts"] = shifts;
            write_sidecar(dir / "cw.csv.json", sidecar);
            m.record_file(dir, "cw.csv");
            m.record_file(dir, "cw.csv.json");
        }
    };

    try {
        evolve_ensemble(ens, gs, c.kick, prop, recorder, options.threads);
    } catch (const BlowUpError& e) {
        close_outputs();
        m.failure = {{"trajectory", e.trajectory()},
                     {"time", e.time()},
                     {"last_saved_time", last_saved},
                     {"message", e.what()}};
        finish_manifest(m, dir, "failed");
        throw;
    }
    close_outputs();
    kick["post_kick_b0_population"] = optional_json(post_kick_b0);
    // largest |N(t)/N(0) - 1| over trajectories and save times
    m.derived["max_norm_drift"] = norm_drift;
    finish_manifest(m, dir, "complete");
    return result;
}

std::vector<ScanPoint> expand_scan(const std::vector<ExperimentConfig>& configs) {
    if (configs.empty()) throw ConfigError("scan needs at least one config");
    const ScanConfig& scan = configs.front().scan;
    std::vector<ScanPoint> points;

    auto strip = [](ExperimentConfig c) {
        c.scan.axes.clear();
        return c;
    };

    if (configs.size() == 1) {
        points.push_back({strip(configs.front()), {}});
        for (const auto& [key, values] : scan.axes) {
            std::vector<ScanPoint> next;
            for (const ScanPoint& p : points) {
                for (const std::string& v : values) {
                    ScanPoint q{p.config.with(key, v), p.values};
                    q.values.emplace_back(key, q.config.get(key));
                    next.push_back(std::move(q));
                }
            }
            points = std::move(next);
        }
        return points;
    }

    const ExperimentConfig base = strip(configs.front());
    for (const ExperimentConfig& cfg : configs) {
        ExperimentConfig probe = strip(cfg);
        ScanPoint p{probe, {}};
        for (const auto& [key, values] : scan.axes) {
            p.values.emplace_back(key, probe.get(key));
            probe = probe.with(key, base.get(key));
        }
        if (!(probe == base)) {
            throw ConfigError("scan configs differ in keys that are not declared scan axes");
        }
        points.push_back(std::move(p));
    }
    return points;
}

std::vector<RunResult> cmd_scan(const std::vector<ExperimentConfig>& configs,
                                const CommandOptions& options) {
    const std::vector<ScanPoint> points = expand_scan(configs);
    for (const ScanPoint& p : points) effective_config(p.config, options);
    const fs::path root = output_dir(configs.front(), options);

    std::vector<RunResult> results;
    json summary = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        CommandOptions sub = options;
        sub.out = root / ("point_" + std::to_string(i));
        std::string label;
        for (const auto& [k, v] : points[i].values) label += " " + k + "=" + v;
        log_line(options, "scan point " + std::to_string(i) + ":" + label);
        results.push_back(cmd_run(points[i].config, sub));
        json values = json::object();
        for (const auto& [k, v] : points[i].values) values[k] = v;
        summary.push_back({{"point", i},
                           {"directory", sub.out.filename().string()},
                           {"values", values},
                           {"derived", results.back().manifest.derived}});
    }

    std::vector<std::string> columns;
    for (const auto& [k, v] : points.front().values) columns.push_back(k);
    for (const char* col : {"t", "taub", "window", "value", "stderr"}) columns.emplace_back(col);
    {
        CsvWriter csv(root / "comparison.csv", columns);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const RunResult& r = results[i];
            for (const WindowSpec& w : r.windows) {
                for (const WindowPoint& p : r.window_series.at(w.name)) {
                    std::vector<std::string> row;
                    for (const auto& kv : points[i].values) row.push_back(kv.second);
                    row.insert(row.end(), {num(p.t), num(p.t / r.breathing_period), w.name,
                                           num(p.value), num(p.stderr_)});
                    csv.row(row);
                }
            }
        }
        csv.flush();
    }

    RunManifest m = start_manifest("scan", configs.front());
    m.metadata["points"] = summary;
    m.record_file(root, "comparison.csv");
    for (std::size_t i = 0; i < results.size(); ++i) {
        for (const FileRecord& f : results[i].manifest.files) {
            m.files.push_back({"point_" + std::to_string(i) + "/" + f.name, f.sha256, f.bytes});
        }
    }
    finish_manifest(m, root, "complete");
    return results;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InfeasibleError*>(&e)) return 4;
    if (dynamic_cast<const NumericalError*>(&e)) return 3;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ShapeError*>(&e) ||
        dynamic_cast<const DomainError*>(&e)) {
        return 2;
    }
    return 1;
}

}  // namespace preheat
