#include "haloscan/simd/kernels.hpp"

#include <cassert>

namespace haloscan::simd {
namespace {

void correlate(std::span<const double> x, std::span<const double> taps, std::span<double> out) {
    assert(x.size() + 1 >= taps.size() + out.size());
    const std::size_t m = taps.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        const double* xi = x.data() + i;
        for (std::size_t j = 0; j < m; ++j) acc += taps[j] * xi[j];
        out[i] = acc;
    }
}

void accumulate_ml(std::span<const double> excess, std::span<const double> signal,
                   std::span<const double> inv_var, std::span<double> num, std::span<double> den) {
    for (std::size_t i = 0; i < excess.size(); ++i) {
        const double sw = signal[i] * inv_var[i];
        num[i] += sw * excess[i];
        den[i] += sw * signal[i];
    }
}

void log_updates(std::span<const double> x, std::span<const double> eta, double g2,
                 std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double mu = g2 * eta[i];
        out[i] = mu * (x[i] - 0.5 * mu);
    }
}

void lorentzian(std::span<const double> detuning, double half_width, double peak,
                std::span<double> out) {
    const double hw2 = half_width * half_width;
    for (std::size_t i = 0; i < detuning.size(); ++i) {
        out[i] = peak * hw2 / (hw2 + detuning[i] * detuning[i]);
    }
}

constexpr KernelTable kTable{Isa::scalar, correlate, accumulate_ml, log_updates, lorentzian};

}  // namespace

const KernelTable& scalar_kernels() { return kTable; }

}  // namespace haloscan::simd
