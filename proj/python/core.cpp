// Python bindings: ground state, spectrum, config handling and the CLI commands.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "preheat/bogoliubov.hpp"
#include "preheat/config.hpp"
#include "preheat/errors.hpp"
#include "preheat/experiment.hpp"
#include "preheat/ground_state.hpp"
#include "preheat/lattice.hpp"
#include "preheat/manifest.hpp"
#include "preheat/twa.hpp"

namespace py = pybind11;
using namespace preheat;

namespace {

GroundState ground_state(const Grid2D& grid, double atoms, std::optional<double> mu,
                         std::optional<double> interaction, double omega_t) {
    if (mu.has_value() == interaction.has_value()) {
        throw ConfigError("give exactly one of mu and interaction");
    }
    const TrapPotential trap{omega_t, grid.ly()};
    if (mu) return solve_at_chemical_potential(grid, trap, atoms, *mu);
    return solve_ground_state(grid, trap, atoms, *interaction);
}

py::dict spectrum(const GroundState& gs, std::size_t threads) {
    const SpectrumTable t = build_spectrum_table(gs, threads);
    std::vector<std::string> branch;
    std::vector<long> n;
    std::vector<double> k, omega;
    for (const BogoliubovMode& m : t.modes) {
        branch.push_back(m.branch.name());
        n.push_back(m.n);
        k.push_back(m.k);
        omega.push_back(m.omega);
    }
    py::dict d;
    d["branch"] = branch;
    d["n"] = py::array(py::cast(n));
    d["k"] = py::array(py::cast(k));
    d["omega"] = py::array(py::cast(omega));
    d["omega_b0"] = t.omega_b0;
    d["k_res_g"] = t.k_res_g;
    d["k_res_d"] = t.k_res_d;
    return d;
}

CommandOptions options_for(const std::filesystem::path& out, std::optional<std::uint64_t> seed,
                           std::size_t threads) {
    CommandOptions o;
    o.out = out;
    o.seed = seed;
    o.threads = threads;
    return o;
}

py::dict manifest_dict(const RunManifest& m) {
    return py::module_::import("json").attr("loads")(m.to_json().dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "preheat C++ core";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    // ShapeError / DomainError derive from std::invalid_argument / std::domain_error,
    // which pybind11 already maps to ValueError

    py::class_<Grid2D>(m, "Grid")
        .def(py::init([](double lx, double ly, std::size_t nx, std::size_t ny) { return build_grid(lx, ly, nx, ny); }),
             py::arg("lx"), py::arg("ly"), py::arg("nx"), py::arg("ny"))
        .def_property_readonly("lx", &Grid2D::lx)
        .def_property_readonly("ly", &Grid2D::ly)
        .def_property_readonly("nx", &Grid2D::nx)
        .def_property_readonly("ny", &Grid2D::ny)
        .def_property_readonly("dx", &Grid2D::dx)
        .def_property_readonly("dy", &Grid2D::dy)
        .def_property_readonly("dk", &Grid2D::dk)
        .def("y_points", &Grid2D::y_points)
        .def("momenta", &Grid2D::momenta)
        .def("__repr__", [](const Grid2D& g) {
            return "Grid(lx=" + format_double(g.lx()) + ", ly=" + format_double(g.ly()) +
                   ", nx=" + std::to_string(g.nx()) + ", ny=" + std::to_string(g.ny()) + ")";
        });

    py::class_<GroundState>(m, "GroundState")
        .def_readonly("grid", &GroundState::grid)
        .def_readonly("phi", &GroundState::phi)
        .def_readonly("mu", &GroundState::mu)
        .def_readonly("interaction", &GroundState::interaction)
        .def_readonly("atoms", &GroundState::atoms)
        .def_readonly("residual", &GroundState::residual)
        .def_readonly("iterations", &GroundState::iterations);

    m.def("ground_state", &ground_state, py::arg("grid"), py::arg("atoms"), py::arg("mu") = py::none(),
          py::arg("interaction") = py::none(), py::arg("omega_t") = 1.0,
          "Transverse ground state at fixed N; calibrates U when mu is given.");
    m.def("single_particle_ground_energy", &single_particle_ground_energy, py::arg("grid"),
          py::arg("omega_t") = 1.0);
    m.def("sound_speed", &compressibility_sound_speed, py::arg("state"));
    m.def("spectrum", &spectrum, py::arg("state"), py::arg("threads") = 1,
          "Bogoliubov table as a dict of arrays (branch, n, k, omega) plus omega_b0 and k_res_g/d.");
    m.def("modulation_frequency",
          [](double t, double amplitude, double t0, double sigma_t) {
              return modulation_frequency(ModulationProtocol{amplitude, t0, sigma_t}, t);
          },
          py::arg("t"), py::arg("amplitude") = ModulationProtocol{}.amplitude,
          py::arg("t0") = ModulationProtocol{}.t0, py::arg("sigma_t") = ModulationProtocol{}.sigma_t);

    m.def("normalize_config",
          [](const std::string& text) {
              const ExperimentConfig c = ExperimentConfig::parse(text);
              c.validate();
              return c.serialize();
          },
          py::arg("text"), "Parse, validate and re-serialize a config.");
    m.def("config_get", [](const std::string& text, const std::string& key) {
        return ExperimentConfig::parse(text).get(key);
    });

    m.def("cmd_ground_state",
          [](const std::filesystem::path& config, const std::filesystem::path& out, std::size_t threads) {
              return manifest_dict(cmd_ground_state(load_config(config), options_for(out, std::nullopt, threads)));
          },
          py::arg("config"), py::arg("out"), py::arg("threads") = 1);
    m.def("cmd_spectrum",
          [](const std::filesystem::path& config, const std::filesystem::path& out, std::size_t threads) {
              return manifest_dict(cmd_spectrum(load_config(config), options_for(out, std::nullopt, threads)));
          },
          py::arg("config"), py::arg("out"), py::arg("threads") = 1);
    m.def("cmd_run",
          [](const std::filesystem::path& config, const std::filesystem::path& out, std::optional<std::uint64_t> seed,
             std::size_t threads) {
              RunResult r;
              {
                  py::gil_scoped_release release;
                  r = cmd_run(load_config(config), options_for(out, seed, threads));
              }
              return manifest_dict(r.manifest);
          },
          py::arg("config"), py::arg("out"), py::arg("seed") = py::none(), py::arg("threads") = 1);

    m.def("sha256_file", [](const std::filesystem::path& p) { return sha256_file(p); });
    m.def("verify_manifest",
          [](const std::filesystem::path& dir) { return RunManifest::read(dir / "manifest.json").verify(dir); },
          py::arg("directory"), "Empty string when every listed file matches its checksum.");
}
