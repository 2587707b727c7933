#include <bit>

#include "sis/kernels/mask_kernels.hpp"

namespace sis::kernels {
namespace {

std::uint64_t popcount_scalar(const std::uint64_t* a, std::size_t n) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i]));
    return total;
}

std::uint64_t and_popcount_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
    return total;
}

std::uint64_t or_popcount_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i] | b[i]));
    return total;
}

void or_into_scalar(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] |= src[i];
}

}  // namespace

const MaskKernels& scalar_kernels() {
    static const MaskKernels k{"scalar", popcount_scalar, and_popcount_scalar, or_popcount_scalar, or_into_scalar};
    return k;
}

}  // namespace sis::kernels
