#include "haloscan/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace haloscan::simd {

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable* avx2_kernels_compiled();
#endif
#if defined(__aarch64__)
const KernelTable* neon_kernels_compiled();
#endif

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

const KernelTable* avx2_kernels() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return avx2_kernels_compiled();
    }
#endif
    return nullptr;
}

const KernelTable* neon_kernels() {
#if defined(__aarch64__)
    return neon_kernels_compiled();  // Advanced SIMD is mandatory on AArch64.
#else
    return nullptr;
#endif
}

namespace {

const KernelTable& select() {
    const char* forced = std::getenv("HALOSCAN_SIMD");
    const std::string want = forced ? forced : "";
    if (want == "scalar") return scalar_kernels();
    if (const KernelTable* t = avx2_kernels(); t && (want.empty() || want == "avx2")) return *t;
    if (const KernelTable* t = neon_kernels(); t && (want.empty() || want == "neon")) return *t;
    return scalar_kernels();
}

}  // namespace

const KernelTable& kernels() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace haloscan::simd
