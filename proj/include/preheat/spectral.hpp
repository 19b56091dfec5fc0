#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <vector>

namespace preheat {

template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), alignment));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <class U>
    friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) {
        return true;
    }
};

using AlignedComplexBuffer = std::vector<std::complex<double>, AlignedAllocator<std::complex<double>>>;

/// Batched in-place DFT along x of an Nx x Ny complex array.
/// Plans are created once (FFTW_ESTIMATE, so the algorithm choice is
/// reproducible) and executed through the new-array interface, which is safe
/// to call concurrently from several threads on distinct buffers.
///
/// x_major: element (ix, iy) at ix * Ny + iy, any alignment.
/// y_major: element (ix, iy) at iy * Nx + ix; buffers must be 64-byte aligned.
class FourierX {
public:
    enum class Layout { x_major, y_major };

    FourierX(std::size_t nx, std::size_t ny, Layout layout = Layout::x_major);
    ~FourierX();
    FourierX(const FourierX&) = delete;
    FourierX& operator=(const FourierX&) = delete;
    FourierX(FourierX&&) noexcept;
    FourierX& operator=(FourierX&&) noexcept;

    /// out_m = sum_j in_j exp(-2 pi i j m / Nx), unnormalized.
    void forward(std::complex<double>* data) const;
    /// out_j = sum_m in_m exp(+2 pi i j m / Nx), unnormalized.
    void backward(std::complex<double>* data) const;

    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    Layout layout() const noexcept { return layout_; }

private:
    struct Plans;
    std::size_t nx_;
    std::size_t ny_;
    Layout layout_;
    std::unique_ptr<Plans> plans_;
};

}  // namespace preheat
