#pragma once

#include <cstddef>
#include <new>
#include <vector>

namespace advd {

/// 64-byte-aligned allocator. All tensor storage and numeric scratch buffers
/// use it so SIMD kernels see the same address phase on every run; without
/// this, thread-scheduling-dependent heap layout changes vector peeling and
/// breaks bit-for-bit reproducibility.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(alignment)));
    }
    void deallocate(T* p, std::size_t) noexcept {
        ::operator delete(p, std::align_val_t(alignment));
    }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const noexcept {
        return true;
    }
};

using AlignedVec = std::vector<double, AlignedAllocator<double>>;

}  // namespace advd
