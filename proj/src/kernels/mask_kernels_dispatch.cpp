#include <cstdlib>
#include <string_view>

#include "sis/kernels/mask_kernels.hpp"

namespace sis::kernels {

#if defined(SIS_HAVE_AVX2)
const MaskKernels* avx2_kernels_unchecked();
#endif
#if defined(SIS_HAVE_NEON)
const MaskKernels* neon_kernels_unchecked();
#endif

const MaskKernels* avx2_kernels() {
#if defined(SIS_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
    return supported ? avx2_kernels_unchecked() : nullptr;
#else
    return nullptr;
#endif
}

const MaskKernels* neon_kernels() {
#if defined(SIS_HAVE_NEON)
    return neon_kernels_unchecked();  // NEON is mandatory on aarch64
#else
    return nullptr;
#endif
}

std::vector<const MaskKernels*> available_kernels() {
    std::vector<const MaskKernels*> out{&scalar_kernels()};
    if (auto* k = avx2_kernels()) out.push_back(k);
    if (auto* k = neon_kernels()) out.push_back(k);
    return out;
}

const MaskKernels& active_kernels() {
    static const MaskKernels& chosen = [] () -> const MaskKernels& {
        const char* forced = std::getenv("SIS_KERNELS");
        if (forced && std::string_view(forced) == "scalar") return scalar_kernels();
        if (auto* k = avx2_kernels()) return *k;
        if (auto* k = neon_kernels()) return *k;
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace sis::kernels
