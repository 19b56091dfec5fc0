#include "preheat/spectral.hpp"

#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace preheat {

namespace {
// the FFTW planner is not re-entrant
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct FourierX::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    ~Plans() {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

FourierX::FourierX(std::size_t nx, std::size_t ny, Layout layout)
    : nx_(nx), ny_(ny), layout_(layout), plans_(new Plans) {
    AlignedComplexBuffer scratch(nx * ny);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const int n = static_cast<int>(nx);
    const int howmany = static_cast<int>(ny);
    const bool rows = layout == Layout::y_major;
    const int stride = rows ? 1 : howmany;
    const int dist = rows ? n : 1;
    const unsigned flags = rows ? FFTW_ESTIMATE : FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    plans_->forward = fftw_plan_many_dft(1, &n, howmany, buf, nullptr, stride, dist, buf, nullptr,
                                         stride, dist, FFTW_FORWARD, flags);
    plans_->backward = fftw_plan_many_dft(1, &n, howmany, buf, nullptr, stride, dist, buf,
                                          nullptr, stride, dist, FFTW_BACKWARD, flags);
    if (!plans_->forward || !plans_->backward) {
        throw std::runtime_error("FFTW planning failed");
    }
}

FourierX::~FourierX() = default;
FourierX::FourierX(FourierX&&) noexcept = default;
FourierX& FourierX::operator=(FourierX&&) noexcept = default;

namespace {
fftw_complex* checked(std::complex<double>* data, FourierX::Layout layout) {
    if (layout == FourierX::Layout::y_major &&
        reinterpret_cast<std::uintptr_t>(data) % 64 != 0) {
        throw std::invalid_argument("y-major FFT buffer is not 64-byte aligned");
    }
    return reinterpret_cast<fftw_complex*>(data);
}
}  // namespace

void FourierX::forward(std::complex<double>* data) const {
    auto* p = checked(data, layout_);
    fftw_execute_dft(plans_->forward, p, p);
}

void FourierX::backward(std::complex<double>* data) const {
    auto* p = checked(data, layout_);
    fftw_execute_dft(plans_->backward, p, p);
}

}  // namespace preheat
