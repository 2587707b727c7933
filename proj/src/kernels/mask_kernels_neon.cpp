#include <arm_neon.h>

#include <bit>

#include "sis/kernels/mask_kernels.hpp"

namespace sis::kernels {
namespace {

inline std::uint64_t sum_bytes(uint8x16_t cnt) { return vaddlvq_u8(cnt); }

std::uint64_t popcount_neon(const std::uint64_t* a, std::size_t n) {
    std::uint64_t total = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) total += sum_bytes(vcntq_u8(vreinterpretq_u8_u64(vld1q_u64(a + i))));
    for (; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i]));
    return total;
}

std::uint64_t and_popcount_neon(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::uint64_t total = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        total += sum_bytes(vcntq_u8(vreinterpretq_u8_u64(vandq_u64(vld1q_u64(a + i), vld1q_u64(b + i)))));
    for (; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
    return total;
}

std::uint64_t or_popcount_neon(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::uint64_t total = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        total += sum_bytes(vcntq_u8(vreinterpretq_u8_u64(vorrq_u64(vld1q_u64(a + i), vld1q_u64(b + i)))));
    for (; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i] | b[i]));
    return total;
}

void or_into_neon(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_u64(dst + i, vorrq_u64(vld1q_u64(dst + i), vld1q_u64(src + i)));
    for (; i < n; ++i) dst[i] |= src[i];
}

}  // namespace

const MaskKernels* neon_kernels_unchecked() {
    static const MaskKernels k{"neon", popcount_neon, and_popcount_neon, or_popcount_neon, or_into_neon};
    return &k;
}

}  // namespace sis::kernels
