#pragma once

// Bit-mask reduction kernels used by the coverage metrics.
//
// Every variant computes the same integer results; the scalar table is the reference and
// the vector tables are selected at runtime when the CPU supports them.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sis::kernels {

struct MaskKernels {
    std::string_view name;
    std::uint64_t (*popcount)(const std::uint64_t* a, std::size_t n);
    std::uint64_t (*and_popcount)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
    std::uint64_t (*or_popcount)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
    void (*or_into)(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
};

const MaskKernels& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks the instructions.
const MaskKernels* avx2_kernels();
const MaskKernels* neon_kernels();

// Every variant usable on this machine, scalar first.
std::vector<const MaskKernels*> available_kernels();

// Best available variant; SIS_KERNELS=scalar in the environment forces the reference.
const MaskKernels& active_kernels();

}  // namespace sis::kernels
