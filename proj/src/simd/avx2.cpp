// Compiled with -mavx2 -mfma; only reached after a runtime feature check.

#include "haloscan/simd/kernels.hpp"

#include <immintrin.h>

namespace haloscan::simd {
namespace {

void correlate(std::span<const double> x, std::span<const double> taps, std::span<double> out) {
    const std::size_t m = taps.size();
    const std::size_t n = out.size();
    const double* xp = x.data();
    const double* tp = taps.data();
    std::size_t i = 0;
    // 16 outputs per pass keeps four independent FMA chains in flight.
    for (; i + 16 <= n; i += 16) {
        __m256d a0 = _mm256_setzero_pd();
        __m256d a1 = _mm256_setzero_pd();
        __m256d a2 = _mm256_setzero_pd();
        __m256d a3 = _mm256_setzero_pd();
        const double* xi = xp + i;
        for (std::size_t j = 0; j < m; ++j) {
            const __m256d t = _mm256_broadcast_sd(tp + j);
            a0 = _mm256_fmadd_pd(t, _mm256_loadu_pd(xi + j), a0);
            a1 = _mm256_fmadd_pd(t, _mm256_loadu_pd(xi + j + 4), a1);
            a2 = _mm256_fmadd_pd(t, _mm256_loadu_pd(xi + j + 8), a2);
            a3 = _mm256_fmadd_pd(t, _mm256_loadu_pd(xi + j + 12), a3);
        }
        _mm256_storeu_pd(out.data() + i, a0);
        _mm256_storeu_pd(out.data() + i + 4, a1);
        _mm256_storeu_pd(out.data() + i + 8, a2);
        _mm256_storeu_pd(out.data() + i + 12, a3);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d a = _mm256_setzero_pd();
        const double* xi = xp + i;
        for (std::size_t j = 0; j < m; ++j) {
            a = _mm256_fmadd_pd(_mm256_broadcast_sd(tp + j), _mm256_loadu_pd(xi + j), a);
        }
        _mm256_storeu_pd(out.data() + i, a);
    }
    for (; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += tp[j] * xp[i + j];
        out[i] = acc;
    }
}

void accumulate_ml(std::span<const double> excess, std::span<const double> signal,
                   std::span<const double> inv_var, std::span<double> num, std::span<double> den) {
    const std::size_t n = excess.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d s = _mm256_loadu_pd(signal.data() + i);
        const __m256d sw = _mm256_mul_pd(s, _mm256_loadu_pd(inv_var.data() + i));
        const __m256d e = _mm256_loadu_pd(excess.data() + i);
        _mm256_storeu_pd(num.data() + i,
                         _mm256_fmadd_pd(sw, e, _mm256_loadu_pd(num.data() + i)));
        _mm256_storeu_pd(den.data() + i,
                         _mm256_fmadd_pd(sw, s, _mm256_loadu_pd(den.data() + i)));
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
    const __m256d vg2 = _mm256_set1_pd(g2);
    const __m256d half = _mm256_set1_pd(0.5);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mu = _mm256_mul_pd(vg2, _mm256_loadu_pd(eta.data() + i));
        const __m256d d = _mm256_fnmadd_pd(half, mu, _mm256_loadu_pd(x.data() + i));
        _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(mu, d));
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
    const __m256d vhw2 = _mm256_set1_pd(hw2);
    const __m256d vnum = _mm256_set1_pd(peak * hw2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_loadu_pd(detuning.data() + i);
        const __m256d den = _mm256_fmadd_pd(d, d, vhw2);
        _mm256_storeu_pd(out.data() + i, _mm256_div_pd(vnum, den));
    }
    for (; i < n; ++i) {
        out[i] = peak * hw2 / (hw2 + detuning[i] * detuning[i]);
    }
}

constexpr KernelTable kTable{Isa::avx2, correlate, accumulate_ml, log_updates, lorentzian};

}  // namespace

const KernelTable* avx2_kernels_compiled() { return &kTable; }

}  // namespace haloscan::simd
