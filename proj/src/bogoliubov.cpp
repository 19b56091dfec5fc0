#include "preheat/bogoliubov.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "preheat/errors.hpp"
#include "preheat/parallel.hpp"

namespace preheat {

std::string Branch::name() const {
    switch (nodes) {
        case 0: return "g";
        case 1: return "d";
        case 2: return "b";
        default: return "h" + std::to_string(nodes);
    }
}

Branch Branch::parse(const std::string& name) {
    if (name == "g") return goldstone();
    if (name == "d") return dipole();
    if (name == "b") return breathing();
    if (name.size() > 1 && name[0] == 'h') {
        try {
            const int j = std::stoi(name.substr(1));
            if (j >= 3) return {j};
        } catch (const std::exception&) {
        }
    }
    throw ConfigError("unknown branch label '" + name + "'");
}

double symplectic_product(const BogoliubovMode& a, const BogoliubovMode& b, double dy) {
    return (a.u.dot(b.u) - a.v.dot(b.v)) * dy;
}

Eigen::MatrixXd bogoliubov_matrix(const GroundState& gs, double k) {
    const auto ny = static_cast<Eigen::Index>(gs.grid.ny());
    const Eigen::VectorXd density = gs.phi.cwiseAbs2();

    Eigen::MatrixXd a = gs.grid.transverse_kinetic();
    a.diagonal().array() += Units::kinetic * k * k - gs.mu;
    a.diagonal() += potential_profile(gs.grid, gs.omega_t) + 2.0 * gs.interaction * density;
    Eigen::MatrixXd b = (gs.interaction * density).asDiagonal();

    if (k == 0.0) {
        const Eigen::VectorXd unit = gs.phi.normalized();
        const Eigen::MatrixXd q =
            Eigen::MatrixXd::Identity(ny, ny) - unit * unit.transpose();
        a = q * a * q;
        b = q * b * q;
        a = 0.5 * (a + a.transpose());
        b = 0.5 * (b + b.transpose());
    }

    Eigen::MatrixXd l(2 * ny, 2 * ny);
    l.topLeftCorner(ny, ny) = a;
    l.topRightCorner(ny, ny) = b;
    l.bottomLeftCorner(ny, ny) = -b;
    l.bottomRightCorner(ny, ny) = -a;
    return l;
}

Branch classify_profile(const Eigen::VectorXcd& profile) {
    const double peak = profile.cwiseAbs().maxCoeff();
    if (!(peak > 0.0)) throw DomainError("cannot classify a vanishing mode profile");
    // theta maximizing sum |Re(e^{-i theta} U)|^2 is arg(sum U^2) / 2
    const std::complex<double> s = (profile.array() * profile.array()).sum();
    const std::complex<double> rot = std::polar(1.0, -0.5 * std::arg(s));
    const double floor = 1e-6 * peak;
    int nodes = 0;
    int last_sign = 0;
    for (Eigen::Index j = 0; j < profile.size(); ++j) {
        const double re = (rot * profile(j)).real();
        if (std::abs(re) <= floor) continue;
        const int sign = re > 0.0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) ++nodes;
        last_sign = sign;
    }
    return {nodes};
}

Branch classify_branch(const BogoliubovMode& mode) {
    return classify_profile(mode.u.cast<std::complex<double>>());
}

std::vector<BogoliubovMode> bogoliubov_at_k(const GroundState& gs, double k) {
    const auto ny = static_cast<Eigen::Index>(gs.grid.ny());
    const double dy = gs.grid.dy();
    const Eigen::MatrixXd l = bogoliubov_matrix(gs, k);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(l, true);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("Bogoliubov eigensolver failed at k = " + std::to_string(k));
    }
    const Eigen::VectorXcd lambda = solver.eigenvalues();
    const Eigen::MatrixXcd vectors = solver.eigenvectors();
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    const bool projected = (k == 0.0);
    const long n = std::lround(k / gs.grid.dk());

    std::vector<BogoliubovMode> modes;
    std::size_t zero_count = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (std::abs(lambda(i).imag()) > 1e-8) {
            throw InstabilityError("dynamically unstable Bogoliubov mode at k = " +
                                   std::to_string(k) + ", Im omega = " +
                                   std::to_string(lambda(i).imag()));
        }
        const double omega = lambda(i).real();
        if (projected && std::abs(omega) < 1e-9 * scale) {
            ++zero_count;
            continue;
        }
        Eigen::VectorXcd vec = vectors.col(i);
        // real eigenvalue of a real matrix: rotate the eigenvector onto the real axis
        Eigen::Index pivot = 0;
        vec.cwiseAbs().maxCoeff(&pivot);
        vec *= std::polar(1.0, -std::arg(vec(pivot)));
        const Eigen::VectorXd re = vec.real();
        const Eigen::VectorXd u = re.head(ny);
        const Eigen::VectorXd v = re.tail(ny);
        const double norm = (u.squaredNorm() - v.squaredNorm()) * dy;
        if (norm <= 0.0) continue;
        if (omega < 0.0) {
            throw InstabilityError("positive-norm Bogoliubov mode with negative energy at k = " +
                                   std::to_string(k));
        }
        BogoliubovMode mode;
        mode.n = n;
        mode.k = k;
        mode.omega = omega;
        mode.u = u / std::sqrt(norm);
        mode.v = v / std::sqrt(norm);
        Eigen::Index peak = 0;
        mode.u.cwiseAbs().maxCoeff(&peak);
        if (mode.u(peak) < 0.0) {
            mode.u = -mode.u;
            mode.v = -mode.v;
        }
        modes.push_back(std::move(mode));
    }

    const std::size_t expected = projected ? gs.grid.ny() - 1 : gs.grid.ny();
    if (modes.size() != expected || (projected && zero_count != 2)) {
        throw NumericalError("Bogoliubov block at k = " + std::to_string(k) + " yielded " +
                             std::to_string(modes.size()) + " positive-norm modes, expected " +
                             std::to_string(expected));
    }
    std::sort(modes.begin(), modes.end(),
              [](const BogoliubovMode& a, const BogoliubovMode& b) { return a.omega < b.omega; });

    if (projected) {
        BogoliubovMode zero;
        zero.n = 0;
        zero.k = 0.0;
        zero.omega = 0.0;
        zero.zero_mode = true;
        zero.u = gs.phi / std::sqrt(gs.phi.squaredNorm() * dy);
        zero.v = -zero.u;
        modes.insert(modes.begin(), std::move(zero));
    }
    for (std::size_t r = 0; r < modes.size(); ++r) {
        modes[r].transverse_index = r;
        modes[r].branch = classify_branch(modes[r]);
    }
    return modes;
}

std::vector<const BogoliubovMode*> SpectrumTable::block(long n) const {
    const long half = static_cast<long>(grid.nx() / 2);
    std::vector<const BogoliubovMode*> out;
    if (n <= -half || n > half) return out;
    for (std::size_t r = 0; r < grid.ny(); ++r) out.push_back(&modes[mode_index(n, r)]);
    return out;
}

const BogoliubovMode* SpectrumTable::find(long n, Branch b) const {
    for (const BogoliubovMode* m : block(n)) {
        if (m->branch == b) return m;
    }
    return nullptr;
}

double SpectrumTable::omega_max() const {
    double w = 0.0;
    for (const auto& m : modes) w = std::max(w, m.omega);
    return w;
}

std::optional<double> resonant_momentum(const GroundState& gs, const SpectrumTable& table,
                                        Branch b, double omega) {
    const long half = static_cast<long>(table.grid.nx() / 2);
    auto branch_omega = [&](double k) -> std::optional<double> {
        for (const auto& m : bogoliubov_at_k(gs, k)) {
            if (m.branch == b) return m.omega;
        }
        return std::nullopt;
    };
    const BogoliubovMode* prev = table.find(0, b);
    if (!prev || prev->omega > omega) return std::nullopt;
    for (long n = 1; n <= half; ++n) {
        const BogoliubovMode* next = table.find(n, b);
        if (!next) return std::nullopt;
        if (next->omega >= omega) {
            double lo = prev->k;
            double hi = next->k;
            for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const auto w = branch_omega(mid);
                if (!w) return std::nullopt;
                (*w < omega ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = next;
    }
    return std::nullopt;
}

SpectrumTable build_spectrum_table(const GroundState& gs, std::size_t threads) {
    const long half = static_cast<long>(gs.grid.nx() / 2);
    std::vector<std::vector<BogoliubovMode>> blocks(static_cast<std::size_t>(half + 1));
    parallel_for(blocks.size(), threads, [&](std::size_t i) {
        blocks[i] = bogoliubov_at_k(gs, gs.grid.k(static_cast<long>(i)));
    });

    SpectrumTable table;
    table.grid = gs.grid;
    table.modes.reserve(gs.grid.size());
    for (long n = -half + 1; n <= half; ++n) {
        const auto& block = blocks[static_cast<std::size_t>(std::abs(n))];
        std::vector<int> seen;
        for (const BogoliubovMode& m : block) {
            BogoliubovMode copy = m;
            copy.n = n;
            copy.k = gs.grid.k(n);
            table.modes.push_back(std::move(copy));
            seen.push_back(m.branch.nodes);
        }
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
            table.ambiguous.push_back(n);
        }
    }

    const BogoliubovMode* breathing = table.find(0, Branch::breathing());
    if (!breathing) throw NumericalError("no breathing mode found at k = 0");
    table.omega_b0 = breathing->omega;
    table.k_res_g = resonant_momentum(gs, table, Branch::goldstone(), 0.5 * table.omega_b0);
    table.k_res_d = resonant_momentum(gs, table, Branch::dipole(), 0.5 * table.omega_b0);
    return table;
}

}  // namespace preheat
