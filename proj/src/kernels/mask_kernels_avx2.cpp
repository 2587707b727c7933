// Compiled with -mavx2 -mpopcnt; only reached after a runtime CPU check.

#include <immintrin.h>

#include <bit>

#include "sis/kernels/mask_kernels.hpp"

namespace sis::kernels {
namespace {

// Nibble-lookup popcount of each byte, summed into four 64-bit lanes.
inline __m256i popcount_lanes(__m256i v) {
    const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1,
                                            2, 2, 3, 2, 3, 3, 4);
    const __m256i low_mask = _mm256_set1_epi8(0x0f);
    __m256i lo = _mm256_and_si256(v, low_mask);
    __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
    __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
    return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

inline std::uint64_t horizontal_sum(__m256i acc) {
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

template <typename Combine, typename CombineScalar>
std::uint64_t reduce(const std::uint64_t* a, const std::uint64_t* b, std::size_t n, Combine combine,
                     CombineScalar combine_scalar) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i vb = b ? _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i)) : va;
        acc = _mm256_add_epi64(acc, popcount_lanes(combine(va, vb)));
    }
    std::uint64_t total = horizontal_sum(acc);
    for (; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(combine_scalar(a[i], b ? b[i] : a[i])));
    return total;
}

std::uint64_t popcount_avx2(const std::uint64_t* a, std::size_t n) {
    return reduce(
        a, nullptr, n, [](__m256i x, __m256i) { return x; }, [](std::uint64_t x, std::uint64_t) { return x; });
}

std::uint64_t and_popcount_avx2(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    return reduce(
        a, b, n, [](__m256i x, __m256i y) { return _mm256_and_si256(x, y); },
        [](std::uint64_t x, std::uint64_t y) { return x & y; });
}

std::uint64_t or_popcount_avx2(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    return reduce(
        a, b, n, [](__m256i x, __m256i y) { return _mm256_or_si256(x, y); },
        [](std::uint64_t x, std::uint64_t y) { return x | y; });
}

void or_into_avx2(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_or_si256(d, s));
    }
    for (; i < n; ++i) dst[i] |= src[i];
}

}  // namespace

const MaskKernels* avx2_kernels_unchecked() {
    static const MaskKernels k{"avx2", popcount_avx2, and_popcount_avx2, or_popcount_avx2, or_into_avx2};
    return &k;
}

}  // namespace sis::kernels
