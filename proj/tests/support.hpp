#pragma once

#include <cmath>
#include <numbers>

#include "preheat/bogoliubov.hpp"
#include "preheat/ground_state.hpp"
#include "preheat/lattice.hpp"

namespace testing {

using namespace preheat;

inline constexpr double pi = std::numbers::pi;

inline Grid2D default_grid() { return build_grid(140.0, 2.5032, 512, 12); }

// Calibrated once per process; the calibration is a pure function.
inline const GroundState& default_state() {
    static const GroundState gs =
        solve_at_chemical_potential(default_grid(), TrapPotential{1.0, 2.5032}, 1e6, 2.38);
    return gs;
}

inline const SpectrumTable& default_table() {
    static const SpectrumTable table = build_spectrum_table(default_state());
    return table;
}

// Short ring with the default transverse box; cheap enough for ensembles.
inline const GroundState& small_state() {
    static const GroundState gs = solve_at_chemical_potential(build_grid(40.0, 2.5032, 64, 8),
                                                              TrapPotential{1.0, 2.5032}, 1e5, 2.38);
    return gs;
}

inline const SpectrumTable& small_table() {
    static const SpectrumTable table = build_spectrum_table(small_state());
    return table;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testing
