#include "haloscan/axion_model.hpp"

#include "haloscan/constants.hpp"
#include "haloscan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace haloscan {

void AxionHypothesis::validate() const {
    if (!(std::isfinite(nu_a) && nu_a > 0)) throw DomainError("axion: nu_a must be positive");
    if (!(std::isfinite(g) && g >= 0)) throw DomainError("axion: g must be non-negative");
    if (!(std::isfinite(snr_ref) && snr_ref > 0)) throw DomainError("axion: snr_ref must be positive");
}

void LineshapeParams::validate() const {
    if (!(velocity_dispersion_kms > 0)) throw DomainError("lineshape: dispersion must be positive");
    if (!(bin_width > 0)) throw DomainError("lineshape: bin width must be positive");
    if (span_bins < 1) throw DomainError("lineshape: span must cover at least one bin");
}

double lineshape_width(double nu_a, const LineshapeParams& params) {
    const double beta_v = params.velocity_dispersion_kms / constants::speed_of_light_kms;
    return nu_a * beta_v * beta_v;
}

double lineshape(double nu, double nu_a, const LineshapeParams& params) {
    const double d = nu - nu_a;
    if (d <= 0) return 0.0;
    const double rate = 3.0 / lineshape_width(nu_a, params);
    return 2.0 / std::sqrt(std::numbers::pi) * std::pow(rate, 1.5) * std::sqrt(d) *
           std::exp(-rate * d);
}

double lineshape_cdf(double offset_hz, double nu_a, const LineshapeParams& params) {
    if (offset_hz <= 0) return 0.0;
    // Regularised lower incomplete gamma P(3/2, y).
    const double y = 3.0 * offset_hz / lineshape_width(nu_a, params);
    return std::erf(std::sqrt(y)) - 2.0 * std::sqrt(y / std::numbers::pi) * std::exp(-y);
}

std::vector<double> lineshape_kernel(double nu_a, const LineshapeParams& params, double lead_hz) {
    params.validate();
    if (lead_hz < 0 || lead_hz >= params.bin_width) {
        throw DomainError("lineshape_kernel: lead must lie in [0, bin_width)");
    }
    std::vector<double> p(static_cast<std::size_t>(params.span_bins));
    double prev = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double upper = lineshape_cdf((k + 1) * params.bin_width - lead_hz, nu_a, params);
        p[k] = upper - prev;
        prev = upper;
    }
    if (prev < 0.999) {
        throw DomainError("lineshape_kernel: span holds less than 99.9% of the signal power");
    }
    for (double& v : p) v /= prev;
    return p;
}

double signal_peak_per_g2(const AxionHypothesis& hyp, const LineshapeParams& params) {
    hyp.validate();
    const std::vector<double> p = lineshape_kernel(hyp.nu_a, params);
    double norm2 = 0.0;
    for (double v : p) norm2 += v * v;
    return hyp.snr_ref * constants::vacuum_quanta / (std::sqrt(kReferenceAverages * norm2));
}

double signal_peak(const AxionHypothesis& hyp, const LineshapeParams& params) {
    return hyp.g * hyp.g * signal_peak_per_g2(hyp, params);
}

double signal_psd(double delta_hz, const AxionHypothesis& hyp, const ReceiverParams& receiver,
                  const LineshapeParams& params) {
    return signal_peak(hyp, params) * cavity_absorption(delta_hz, receiver.kappa_l, receiver.beta);
}

std::vector<double> signal_spectrum(const AxionHypothesis& hyp, const ReceiverParams& receiver,
                                    const LineshapeParams& params, double nu_start,
                                    std::size_t n_bins) {
    std::vector<double> s(n_bins, 0.0);
    if (hyp.g == 0.0) return s;
    const double bw = params.bin_width;
    const double pos = (hyp.nu_a - nu_start) / bw;
    const auto first = static_cast<long long>(std::floor(pos));
    const double lead = std::clamp((pos - static_cast<double>(first)) * bw, 0.0,
                                   std::nextafter(bw, 0.0));
    const std::vector<double> kernel = lineshape_kernel(hyp.nu_a, params, lead);
    const double peak = signal_peak(hyp, params);
    for (std::size_t k = 0; k < kernel.size(); ++k) {
        const long long j = first + static_cast<long long>(k);
        if (j < 0 || j >= static_cast<long long>(n_bins)) continue;
        const double centre = nu_start + (static_cast<double>(j) + 0.5) * bw;
        s[static_cast<std::size_t>(j)] =
            peak * cavity_absorption(centre - receiver.nu_c, receiver.kappa_l, receiver.beta) *
            kernel[k];
    }
    return s;
}

}  // namespace haloscan
