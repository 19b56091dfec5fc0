#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "preheat/config.hpp"
#include "preheat/errors.hpp"
#include "preheat/experiment.hpp"
#include "preheat/manifest.hpp"

using namespace preheat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("preheat_test_config_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("default config describes the full-size run") {
    const ExperimentConfig c = ExperimentConfig::parse("");
    CHECK(c.grid.lx == 140.0);
    CHECK(c.grid.ly == 2.5032);
    CHECK(c.grid.nx == 512);
    CHECK(c.grid.ny == 12);
    CHECK(c.physics.atoms == 1e6);
    CHECK(c.physics.mu_target == 2.38);
    CHECK_FALSE(c.physics.interaction.has_value());
    CHECK(c.ensemble.trajectories == 1000);
    CHECK(c.time.dt == 5e-3);
    CHECK(c.time.t_end_periods == 150.0);
    CHECK(c.time.save_every_periods == 0.125);
    CHECK(c.window_spacings == 6.0);
}

TEST_CASE("config round trip: parse, serialize, parse") {
    const std::string text = R"(
[grid]
lx = 33.3
ly = 3.54
nx = 64
ny = 8

[physics]
atoms = 12345.678
interaction = 0.1

[kick]
amplitude = 0.1
t0 = 3.14159
sigma_t = 0.7

[time]
dt = 0.001
t_end = 10
save_every = 0.1

[ensemble]
trajectories = 17
master_seed = 18446744073709551615

[windows]
half_width_spacings = 3
g.k_center = 1.25
extra.branch = h3
extra.k_center = 0.5
extra.half_width = 0.2

[output]
directory = somewhere/else
populations = false
population_every = 2
population_branches = g, h4
cw_stride = 1

[scan]
physics.atoms = 1e6, 1e4
kick.amplitude = 0.2, 0.3
)";
    const ExperimentConfig a = ExperimentConfig::parse(text);
    const std::string once = a.serialize();
    const ExperimentConfig b = ExperimentConfig::parse(once);
    CHECK(a == b);
    CHECK(b.serialize() == once);
    CHECK(a.physics.atoms == 12345.678);
    CHECK(a.ensemble.master_seed == 18446744073709551615ull);
    CHECK(a.output.population_branches.size() == 2);
    CHECK(a.output.population_branches[1] == Branch{4});
    REQUIRE(a.windows.size() == 2);
    CHECK(a.windows[1].branch == Branch{3});
    REQUIRE(a.scan.axes.size() == 2);
    CHECK(a.scan.axes[0].first == "physics.atoms");

    const ExperimentConfig d = ExperimentConfig::parse(ExperimentConfig{}.serialize());
    CHECK(d == ExperimentConfig{});
}

TEST_CASE("shortest round-trip number formatting") {
    for (double v : {0.1, 1e6, 2.5032, 4.0 * 3.141592653589793, 1.0 / 3.0, 5e-324}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(ExperimentConfig::parse("[grid]\nlz = 3\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[gird]\nlx = 3\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[grid]\nlx = abc\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[physics]\nmu_target = 2\ninteraction = 1\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[time]\nt_end = 5\nt_end_periods = 3\n"), ConfigError);
    // parse checks syntax and keys; value ranges are checked by validate()
    CHECK_NOTHROW(ExperimentConfig::parse("[kick]\namplitude = -2\n"));
    CHECK_THROWS_AS(ExperimentConfig::parse("[kick]\namplitude = -2\n").validate(), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[scan]\ngrid.bogus = 1, 2\n").validate(), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[scan]\nscan.x = 1, 2\n").validate(), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[output]\ncw_stride = 0\n").validate(), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[ensemble]\ntrajectories = 0\n").validate(), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[grid]\nnx = 13\n").validate(), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[grid]\nlx = -1\n").validate(), ConfigError);
    CHECK_NOTHROW(ExperimentConfig{}.validate());
    CHECK_THROWS_AS(ExperimentConfig::parse("[output]\npopulations = maybe\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("lx = 3\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[grid\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("with / get") {
    const ExperimentConfig c;
    const ExperimentConfig d = c.with("physics.atoms", "1e4");
    CHECK(d.physics.atoms == 1e4);
    CHECK(d.get("physics.atoms") == "10000");
    // setting U drops mu_target so the pair stays exclusive
    const ExperimentConfig e = c.with("physics.interaction", "0.5");
    CHECK(e.physics.interaction == 0.5);
    CHECK_FALSE(e.physics.mu_target.has_value());
    CHECK(e.get("physics.mu_target").empty());
    CHECK_THROWS_AS(c.with("grid.nope", "1"), ConfigError);
}

TEST_CASE("scan expansion") {
    const ExperimentConfig c = ExperimentConfig::parse(
        "[scan]\nphysics.atoms = 1e6, 1e4\nkick.amplitude = 0.2, 0.3, 0.4\n");
    const auto points = expand_scan({c});
    REQUIRE(points.size() == 6);
    CHECK(points[0].config.physics.atoms == 1e6);
    CHECK(points[0].config.kick.amplitude == 0.2);
    CHECK(points[2].config.kick.amplitude == 0.4);
    CHECK(points[3].config.physics.atoms == 1e4);
    CHECK(points[3].values[0].second == "10000");
    CHECK(points[0].config.scan.axes.empty());

    const ExperimentConfig single;
    REQUIRE(expand_scan({single}).size() == 1);
    CHECK(expand_scan({single})[0].config == single);
}

TEST_CASE("scan over several configs checks the non-scan keys") {
    const ExperimentConfig a = ExperimentConfig::parse("[scan]\nphysics.atoms = 1e6, 1e4\n");
    ExperimentConfig b = a.with("physics.atoms", "1e4");
    const auto points = expand_scan({a, b});
    REQUIRE(points.size() == 2);
    CHECK(points[1].values[0].second == "10000");

    ExperimentConfig bad = b.with("grid.nx", "256");
    CHECK_THROWS_AS(expand_scan({a, bad}), ConfigError);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const fs::path dir = scratch("sha");
    std::ofstream(dir / "f.txt") << "abc";
    CHECK(sha256_file(dir / "f.txt") == sha256_hex("abc"));
}

TEST_CASE("manifest round trip and checksum verification") {
    const fs::path dir = scratch("manifest");
    std::ofstream(dir / "a.csv") << "t,x\n1,2\n";
    RunManifest m;
    m.command = "run";
    m.version = "0.1.0";
    m.config = ExperimentConfig{}.serialize();
    m.master_seed = 7;
    m.derived["mu"] = 2.38;
    m.status = "complete";
    m.record_file(dir, "a.csv");
    m.write(dir / "manifest.json");
    CHECK_FALSE(fs::exists(dir / "manifest.json.tmp"));

    const RunManifest r = RunManifest::read(dir / "manifest.json");
    CHECK(r.command == "run");
    CHECK(r.master_seed == 7);
    CHECK(r.config == m.config);
    CHECK(r.derived["mu"] == 2.38);
    REQUIRE(r.files.size() == 1);
    CHECK(r.files[0].bytes == 8);
    CHECK(r.verify(dir).empty());

    std::ofstream(dir / "a.csv", std::ios::app) << "3,4\n";
    CHECK(r.verify(dir).find("a.csv") != std::string::npos);
    fs::remove(dir / "a.csv");
    CHECK(r.verify(dir).find("missing") != std::string::npos);

    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(RunManifest::read(dir / "bad.json"), ConfigError);
}

TEST_CASE("a manifest can stand in for its config") {
    const fs::path dir = scratch("load");
    const ExperimentConfig c = ExperimentConfig::parse("[grid]\nnx = 64\n[ensemble]\nmaster_seed = 5\n");
    RunManifest m;
    m.command = "run";
    m.config = c.serialize();
    m.write(dir / "manifest.json");
    CHECK(load_config(dir / "manifest.json") == c);
}

TEST_CASE("exit codes") {
    CHECK(exit_code_for(ConfigError("x")) == 2);
    CHECK(exit_code_for(ShapeError("x")) == 2);
    CHECK(exit_code_for(NumericalError("x")) == 3);
    CHECK(exit_code_for(BlowUpError("x", 1, 2.0)) == 3);
    CHECK(exit_code_for(ConvergenceError("x", 1.0)) == 3);
    CHECK(exit_code_for(InfeasibleError("x")) == 4);
    CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("save schedule and resolved times") {
    const auto s = save_schedule(1.0, 0.25);
    REQUIRE(s.size() == 5);
    CHECK(s.front() == 0.0);
    CHECK(s.back() == 1.0);
    ExperimentConfig c;
    CHECK(resolved_t_end(c, 4.0) == doctest::Approx(150.0 * 2.0 * 3.141592653589793 / 4.0));
    CHECK(resolved_save_every(c, 4.0) == doctest::Approx(0.125 * 2.0 * 3.141592653589793 / 4.0));
    c.time.t_end = 7.0;
    c.time.save_every = 0.5;
    CHECK(resolved_t_end(c, 4.0) == 7.0);
    CHECK(resolved_save_every(c, 4.0) == 0.5);
}
