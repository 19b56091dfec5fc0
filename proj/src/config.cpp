#include "preheat/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "preheat/errors.hpp"

namespace preheat {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;
using Sections = std::vector<std::pair<std::string, Entries>>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const std::string t = trim(text);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw ConfigError("'" + key + "': expected a finite number, got '" + text + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const std::string t = trim(text);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        // integral values written in floating notation (1e3) are accepted
        const double d = parse_double(key, text);
        if (d < 0.0 || d != std::floor(d) || d > 1.8e19) {
            throw ConfigError("'" + key + "': expected a non-negative integer, got '" + text + "'");
        }
        return static_cast<std::uint64_t>(d);
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    throw ConfigError("'" + key + "': expected true or false, got '" + text + "'");
}

Sections read_sections(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config syntax error at line " + std::to_string(e.line()) + ": " +
                          e.message());
    }
    Sections out;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            throw ConfigError("key '" + section + "' appears outside any [section]");
        }
        Entries entries;
        for (const auto& [key, value] : body) entries.emplace_back(key, value.data());
        out.emplace_back(section, std::move(entries));
    }
    return out;
}

Sections to_sections(const ExperimentConfig& c) {
    Sections s;
    s.push_back({"grid",
                 {{"lx", format_double(c.grid.lx)},
                  {"ly", format_double(c.grid.ly)},
                  {"nx", std::to_string(c.grid.nx)},
                  {"ny", std::to_string(c.grid.ny)}}});

    Entries physics{{"atoms", format_double(c.physics.atoms)}};
    if (c.physics.mu_target) physics.emplace_back("mu_target", format_double(*c.physics.mu_target));
    if (c.physics.interaction) {
        physics.emplace_back("interaction", format_double(*c.physics.interaction));
    }
    s.push_back({"physics", physics});

    s.push_back({"kick",
                 {{"amplitude", format_double(c.kick.amplitude)},
                  {"t0", format_double(c.kick.t0)},
                  {"sigma_t", format_double(c.kick.sigma_t)}}});

    Entries time{{"dt", format_double(c.time.dt)}};
    if (c.time.t_end) {
        time.emplace_back("t_end", format_double(*c.time.t_end));
    } else {
        time.emplace_back("t_end_periods", format_double(c.time.t_end_periods));
    }
    if (c.time.save_every) {
        time.emplace_back("save_every", format_double(*c.time.save_every));
    } else {
        time.emplace_back("save_every_periods", format_double(c.time.save_every_periods));
    }
    s.push_back({"time", time});

    s.push_back({"ensemble",
                 {{"trajectories", std::to_string(c.ensemble.trajectories)},
                  {"master_seed", std::to_string(c.ensemble.master_seed)}}});

    Entries windows{{"half_width_spacings", format_double(c.window_spacings)}};
    for (const WindowOverride& w : c.windows) {
        if (w.branch) windows.emplace_back(w.name + ".branch", w.branch->name());
        if (w.k_center) windows.emplace_back(w.name + ".k_center", format_double(*w.k_center));
        if (w.half_width) windows.emplace_back(w.name + ".half_width", format_double(*w.half_width));
    }
    s.push_back({"windows", windows});

    std::vector<std::string> branches;
    for (Branch b : c.output.population_branches) branches.push_back(b.name());
    s.push_back({"output",
                 {{"directory", c.output.directory},
                  {"populations", c.output.populations ? "true" : "false"},
                  {"windows", c.output.windows ? "true" : "false"},
                  {"correlations", c.output.correlations ? "true" : "false"},
                  {"population_every", std::to_string(c.output.population_every)},
                  {"population_branches", join_list(branches)},
                  {"cw_stride", std::to_string(c.output.cw_stride)}}});

    if (!c.scan.axes.empty()) {
        Entries scan;
        for (const auto& [key, values] : c.scan.axes) scan.emplace_back(key, join_list(values));
        s.push_back({"scan", scan});
    }
    return s;
}

ExperimentConfig from_sections(const Sections& sections) {
    ExperimentConfig c;
    std::map<std::string, int> seen_sections;
    bool mu_given = false;
    bool u_given = false;
    bool t_end_given = false;
    bool t_end_periods_given = false;
    bool save_given = false;
    bool save_periods_given = false;

    for (const auto& [section, entries] : sections) {
        if (seen_sections[section]++) throw ConfigError("section [" + section + "] repeated");
        std::map<std::string, int> seen_keys;
        for (const auto& [key, value] : entries) {
            const std::string full = section + "." + key;
            if (seen_keys[key]++) throw ConfigError("key '" + full + "' repeated");
            auto unknown = [&] { return ConfigError("unknown config key '" + full + "'"); };

            if (section == "grid") {
                if (key == "lx") c.grid.lx = parse_double(full, value);
                else if (key == "ly") c.grid.ly = parse_double(full, value);
                else if (key == "nx") c.grid.nx = parse_unsigned(full, value);
                else if (key == "ny") c.grid.ny = parse_unsigned(full, value);
                else throw unknown();
            } else if (section == "physics") {
                if (key == "atoms") {
                    c.physics.atoms = parse_double(full, value);
                } else if (key == "mu_target") {
                    c.physics.mu_target = parse_double(full, value);
                    mu_given = true;
                } else if (key == "interaction") {
                    c.physics.interaction = parse_double(full, value);
                    u_given = true;
                } else {
                    throw unknown();
                }
            } else if (section == "kick") {
                if (key == "amplitude") c.kick.amplitude = parse_double(full, value);
                else if (key == "t0") c.kick.t0 = parse_double(full, value);
                else if (key == "sigma_t") c.kick.sigma_t = parse_double(full, value);
                else throw unknown();
            } else if (section == "time") {
                if (key == "dt") {
                    c.time.dt = parse_double(full, value);
                } else if (key == "t_end") {
                    c.time.t_end = parse_double(full, value);
                    t_end_given = true;
                } else if (key == "t_end_periods") {
                    c.time.t_end_periods = parse_double(full, value);
                    t_end_periods_given = true;
                } else if (key == "save_every") {
                    c.time.save_every = parse_double(full, value);
                    save_given = true;
                } else if (key == "save_every_periods") {
                    c.time.save_every_periods = parse_double(full, value);
                    save_periods_given = true;
                } else {
                    throw unknown();
                }
            } else if (section == "ensemble") {
                if (key == "trajectories") c.ensemble.trajectories = parse_unsigned(full, value);
                else if (key == "master_seed") c.ensemble.master_seed = parse_unsigned(full, value);
                else throw unknown();
            } else if (section == "windows") {
                if (key == "half_width_spacings") {
                    c.window_spacings = parse_double(full, value);
                    continue;
                }
                const auto dot = key.rfind('.');
                if (dot == std::string::npos || dot == 0) throw unknown();
                const std::string name = key.substr(0, dot);
                const std::string field = key.substr(dot + 1);
                auto it = std::find_if(c.windows.begin(), c.windows.end(),
                                       [&](const WindowOverride& w) { return w.name == name; });
                if (it == c.windows.end()) {
                    c.windows.push_back({name, {}, {}, {}});
                    it = std::prev(c.windows.end());
                }
                if (field == "branch") it->branch = Branch::parse(trim(value));
                else if (field == "k_center") it->k_center = parse_double(full, value);
                else if (field == "half_width") it->half_width = parse_double(full, value);
                else throw unknown();
            } else if (section == "output") {
                if (key == "directory") {
                    c.output.directory = trim(value);
                } else if (key == "populations") {
                    c.output.populations = parse_bool(full, value);
                } else if (key == "windows") {
                    c.output.windows = parse_bool(full, value);
                } else if (key == "correlations") {
                    c.output.correlations = parse_bool(full, value);
                } else if (key == "population_every") {
                    c.output.population_every = parse_unsigned(full, value);
                } else if (key == "population_branches") {
                    c.output.population_branches.clear();
                    for (const auto& b : split_list(value)) {
                        c.output.population_branches.push_back(Branch::parse(b));
                    }
                } else if (key == "cw_stride") {
                    c.output.cw_stride = parse_unsigned(full, value);
                } else {
                    throw unknown();
                }
            } else if (section == "scan") {
                auto values = split_list(value);
                if (values.empty()) throw ConfigError("scan axis '" + key + "' has no values");
                c.scan.axes.emplace_back(key, std::move(values));
            } else {
                throw ConfigError("unknown config section [" + section + "]");
            }
        }
    }

    if (mu_given && u_given) {
        throw ConfigError("physics: give exactly one of mu_target and interaction");
    }
    if (u_given) c.physics.mu_target.reset();
    if (t_end_given && t_end_periods_given) {
        throw ConfigError("time: give at most one of t_end and t_end_periods");
    }
    if (save_given && save_periods_given) {
        throw ConfigError("time: give at most one of save_every and save_every_periods");
    }
    return c;
}

std::string write_sections(const Sections& sections) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [section, entries] : sections) {
        if (!first) out << '\n';
        first = false;
        out << '[' << section << "]\n";
        for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
    }
    return out.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    return from_sections(read_sections(text));
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string ExperimentConfig::serialize() const { return write_sections(to_sections(*this)); }

void ExperimentConfig::validate() const {
    build_grid(grid.lx, grid.ly, grid.nx, grid.ny);
    if (!(physics.atoms > 0.0)) throw ConfigError("physics.atoms must be positive");
    if (physics.mu_target.has_value() == physics.interaction.has_value()) {
        throw ConfigError("physics: give exactly one of mu_target and interaction");
    }
    if (physics.interaction && !(*physics.interaction >= 0.0)) {
        throw ConfigError("physics.interaction must be non-negative");
    }
    kick.validate();
    if (!(time.dt > 0.0)) throw ConfigError("time.dt must be positive");
    if (time.t_end ? !(*time.t_end >= 0.0) : !(time.t_end_periods >= 0.0)) {
        throw ConfigError("time: run length must be non-negative");
    }
    if (time.save_every ? !(*time.save_every > 0.0) : !(time.save_every_periods > 0.0)) {
        throw ConfigError("time: save interval must be positive");
    }
    if (ensemble.trajectories < 1) throw ConfigError("ensemble.trajectories must be at least 1");
    if (!(window_spacings >= 0.0)) throw ConfigError("windows.half_width_spacings must be >= 0");
    for (const WindowOverride& w : windows) {
        if (w.half_width && !(*w.half_width >= 0.0)) {
            throw ConfigError("window '" + w.name + "': half_width must be >= 0");
        }
    }
    if (output.population_every < 1) throw ConfigError("output.population_every must be >= 1");
    if (output.cw_stride < 1 || output.cw_stride > grid.nx) {
        throw ConfigError("output.cw_stride must lie in [1, nx]");
    }
    for (const auto& [key, values] : scan.axes) {
        if (key.rfind("scan.", 0) == 0) throw ConfigError("scan axes cannot scan the scan section");
        for (const auto& v : values) with(key, v);
    }
}

ExperimentConfig ExperimentConfig::with(const std::string& key, const std::string& value) const {
    const auto dot = key.find('.');
    if (dot == std::string::npos) throw ConfigError("scan key '" + key + "' must be section.key");
    const std::string section = key.substr(0, dot);
    const std::string name = key.substr(dot + 1);
    Sections s = to_sections(*this);
    auto sec = std::find_if(s.begin(), s.end(), [&](const auto& p) { return p.first == section; });
    if (sec == s.end()) {
        s.push_back({section, {}});
        sec = std::prev(s.end());
    }
    Entries& entries = sec->second;
    // switching between alternative keys drops the other one
    static const std::map<std::string, std::string> alternatives{
        {"physics.mu_target", "interaction"}, {"physics.interaction", "mu_target"},
        {"time.t_end", "t_end_periods"},       {"time.t_end_periods", "t_end"},
        {"time.save_every", "save_every_periods"}, {"time.save_every_periods", "save_every"}};
    if (auto alt = alternatives.find(key); alt != alternatives.end()) {
        std::erase_if(entries, [&](const auto& e) { return e.first == alt->second; });
    }
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const auto& e) { return e.first == name; });
    if (it == entries.end()) {
        entries.emplace_back(name, value);
    } else {
        it->second = value;
    }
    return from_sections(s);
}

std::string ExperimentConfig::get(const std::string& key) const {
    const auto dot = key.find('.');
    if (dot == std::string::npos) return {};
    for (const auto& [section, entries] : to_sections(*this)) {
        if (section != key.substr(0, dot)) continue;
        for (const auto& [k, v] : entries) {
            if (k == key.substr(dot + 1)) return v;
        }
    }
    return {};
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.grid == b.grid && a.physics == b.physics && a.kick.amplitude == b.kick.amplitude &&
           a.kick.t0 == b.kick.t0 && a.kick.sigma_t == b.kick.sigma_t && a.time == b.time &&
           a.ensemble == b.ensemble && a.window_spacings == b.window_spacings &&
           a.windows == b.windows && a.output == b.output && a.scan == b.scan;
}

}  // namespace preheat
