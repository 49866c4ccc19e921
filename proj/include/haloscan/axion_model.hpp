#pragma once

#include "haloscan/receiver_model.hpp"

#include <cstdint>
#include <vector>

namespace haloscan {

// Number of spectra averaged in the reference integration that defines
// snr_ref (tau = 3600 s at 100 Hz resolution).
inline constexpr double kReferenceAverages = 360000.0;

struct AxionHypothesis {
    double nu_a = 4.14e9;  // rest-frame frequency, Hz
    double g = 1.0;        // coupling in KSVZ units
    // Matched-filter SNR per unit g^2 of one reference spectrum for a signal
    // that is fully absorbed on resonance (1 - |Gamma|^2 = 1) against vacuum
    // noise (1/4 quanta).
    double snr_ref = 1.0;

    void validate() const;
};

struct LineshapeParams {
    double velocity_dispersion_kms = 270.0;
    double bin_width = 100.0;  // Hz
    int span_bins = 512;

    void validate() const;
};

// Width parameter nu_a <v^2> / c^2 in Hz.
double lineshape_width(double nu_a, const LineshapeParams& params);

// Virialized (Maxwell-Boltzmann) density in 1/Hz, zero below nu_a. Normalised
// over the half-line.
double lineshape(double nu, double nu_a, const LineshapeParams& params);

// Integral of the density from nu_a to nu_a + offset.
double lineshape_cdf(double offset_hz, double nu_a, const LineshapeParams& params);

// Fractions of signal power in span_bins consecutive bins of width bin_width
// whose first bin starts at nu_a - lead_hz (0 <= lead_hz < bin_width gives
// the fractional offset of an off-grid axion). Normalised to sum 1 over the
// span.
std::vector<double> lineshape_kernel(double nu_a, const LineshapeParams& params,
                                     double lead_hz = 0.0);

// On-resonance signal density for a fully absorbing cavity: g^2 A_ref, in
// quanta per bin. The receiver model multiplies it by 1 - |Gamma|^2.
double signal_peak(const AxionHypothesis& hyp, const LineshapeParams& params);

// Same with g = 1.
double signal_peak_per_g2(const AxionHypothesis& hyp, const LineshapeParams& params);

// S_ax(delta) = g^2 A_ref (1 - |Gamma(delta)|^2); the detuning profile before
// the lineshape is applied.
double signal_psd(double delta_hz, const AxionHypothesis& hyp, const ReceiverParams& receiver,
                  const LineshapeParams& params);

// Signal in each bin of the grid nu_start + j * bin_width (j < n_bins) for an
// axion observed with the given receiver: the detuning envelope at the bin
// centre times the lineshape fraction of that bin.
std::vector<double> signal_spectrum(const AxionHypothesis& hyp, const ReceiverParams& receiver,
                                    const LineshapeParams& params, double nu_start,
                                    std::size_t n_bins);

}  // namespace haloscan
