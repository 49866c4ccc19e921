#pragma once

// Data-parallel inner loops used by the processing chain. Each kernel has a
// scalar reference implementation and vectorized variants; the active table
// is chosen once at startup from CPU features (override with HALOSCAN_SIMD).

#include <span>
#include <string_view>

namespace haloscan::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;

    // out[i] = sum_j taps[j] * x[i + j];  out.size() == x.size() - taps.size() + 1
    void (*correlate)(std::span<const double> x, std::span<const double> taps,
                      std::span<double> out);

    // Maximum-likelihood accumulation of one spectrum into running sums:
    //   num[i] += signal[i] * inv_var[i] * excess[i]
    //   den[i] += signal[i] * signal[i] * inv_var[i]
    void (*accumulate_ml)(std::span<const double> excess, std::span<const double> signal,
                          std::span<const double> inv_var, std::span<double> num,
                          std::span<double> den);

    // out[i] = mu[i] * x[i] - mu[i]^2 / 2 with mu[i] = g2 * eta[i]
    void (*log_updates)(std::span<const double> x, std::span<const double> eta, double g2,
                        std::span<double> out);

    // out[i] = peak * hw^2 / (hw^2 + d[i]^2)
    void (*lorentzian)(std::span<const double> detuning, double half_width, double peak,
                       std::span<double> out);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks the features.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Active table for this process.
const KernelTable& kernels();

}  // namespace haloscan::simd
