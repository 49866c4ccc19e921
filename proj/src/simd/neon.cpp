#include "haloscan/simd/kernels.hpp"

#include <arm_neon.h>

namespace haloscan::simd {
namespace {

void correlate(std::span<const double> x, std::span<const double> taps, std::span<double> out) {
    const std::size_t m = taps.size();
    const std::size_t n = out.size();
    const double* xp = x.data();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        float64x2_t a0 = vdupq_n_f64(0.0);
        float64x2_t a1 = vdupq_n_f64(0.0);
        float64x2_t a2 = vdupq_n_f64(0.0);
        float64x2_t a3 = vdupq_n_f64(0.0);
        const double* xi = xp + i;
        for (std::size_t j = 0; j < m; ++j) {
            const float64x2_t t = vdupq_n_f64(taps[j]);
            a0 = vfmaq_f64(a0, t, vld1q_f64(xi + j));
            a1 = vfmaq_f64(a1, t, vld1q_f64(xi + j + 2));
            a2 = vfmaq_f64(a2, t, vld1q_f64(xi + j + 4));
            a3 = vfmaq_f64(a3, t, vld1q_f64(xi + j + 6));
        }
        vst1q_f64(out.data() + i, a0);
        vst1q_f64(out.data() + i + 2, a1);
        vst1q_f64(out.data() + i + 4, a2);
        vst1q_f64(out.data() + i + 6, a3);
    }
    for (; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += taps[j] * xp[i + j];
        out[i] = acc;
    }
}

void accumulate_ml(std::span<const double> excess, std::span<const double> signal,
                   std::span<const double> inv_var, std::span<double> num, std::span<double> den) {
    const std::size_t n = excess.size();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t s = vld1q_f64(signal.data() + i);
        const float64x2_t sw = vmulq_f64(s, vld1q_f64(inv_var.data() + i));
        vst1q_f64(num.data() + i,
                  vfmaq_f64(vld1q_f64(num.data() + i), sw, vld1q_f64(excess.data() + i)));
        vst1q_f64(den.data() + i, vfmaq_f64(vld1q_f64(den.data() + i), sw, s));
    }
    for (; i < n; ++i) {
        const double sw = signal[i] * inv_var[i];
        num[i] += sw * excess[i];
        den[i] += sw * signal[i];
    }
}

void log_updates(std::span<const double> x, std::span<const double> eta, double g2,
                 std::span<double> out) {
    const std::size_t n = x.size();
    const float64x2_t vg2 = vdupq_n_f64(g2);
    const float64x2_t half = vdupq_n_f64(0.5);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t mu = vmulq_f64(vg2, vld1q_f64(eta.data() + i));
        const float64x2_t d = vfmsq_f64(vld1q_f64(x.data() + i), half, mu);
        vst1q_f64(out.data() + i, vmulq_f64(mu, d));
    }
    for (; i < n; ++i) {
        const double mu = g2 * eta[i];
        out[i] = mu * (x[i] - 0.5 * mu);
    }
}

void lorentzian(std::span<const double> detuning, double half_width, double peak,
                std::span<double> out) {
    const std::size_t n = detuning.size();
    const double hw2 = half_width * half_width;
    const float64x2_t vhw2 = vdupq_n_f64(hw2);
    const float64x2_t vnum = vdupq_n_f64(peak * hw2);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vld1q_f64(detuning.data() + i);
        vst1q_f64(out.data() + i, vdivq_f64(vnum, vfmaq_f64(vhw2, d, d)));
    }
    for (; i < n; ++i) {
        out[i] = peak * hw2 / (hw2 + detuning[i] * detuning[i]);
    }
}

constexpr KernelTable kTable{Isa::neon, correlate, accumulate_ml, log_updates, lorentzian};

}  // namespace

const KernelTable* neon_kernels_compiled() { return &kTable; }

}  // namespace haloscan::simd
