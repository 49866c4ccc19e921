#pragma once

// Receiver calibration from the three-spectrum squeezing/cavity protocol and
// the hot/cold load measurement.
//
// Quanta are single-quadrature throughout: vacuum is 1/4 and a thermal load
// at temperature T contributes (1/4) coth(h nu / 2 k_B T). Mixing this with
// the two-quadrature convention (vacuum 1/2) silently doubles N_A.
//
// Band averages use inverse-variance weights derived from the radiometer
// uncertainty 1/sqrt(n_averages) of each bin.

#include "haloscan/campaign_sim.hpp"

#include <vector>

namespace haloscan {

struct AddedNoiseEstimate {
    double N_A = 0.0;
    double N_A_sigma = 0.0;
    double gain_db = 0.0;
    double gain_sigma_db = 0.0;
    std::vector<double> N_A_per_bin;
    std::vector<double> gain_per_bin;
};

// Two-point solve of P = gain (N_load(T) + N_A) in every bin.
AddedNoiseEstimate infer_added_noise(const RawSpectrum& hot, const RawSpectrum& cold, double T_hot,
                                     double T_cold);

// What the cavity-noise and squeezing solves need to know about the receiver.
struct CavityGeometry {
    double nu_c = 0.0;
    double kappa_l = 0.0;
    double beta = 0.0;
    double N_f = 0.0;
    double N_A = 0.0;
    double N_c0 = 0.0;  // only used by infer_squeezing
};

struct CavityNoiseEstimate {
    double N_c0 = 0.0;
    double sigma = 0.0;
    bool physical = true;  // false when the solution falls below the vacuum floor
};

// meas1: cavity detuned by meta.cavity_offset_hz, squeezer off.
// meas3: on resonance, squeezer off.
CavityNoiseEstimate infer_cavity_noise(const RawSpectrum& meas1, const RawSpectrum& meas3,
                                       const CavityGeometry& geometry);

struct SqueezingEstimate {
    double G_s = 1.0;
    double G_s_sigma = 0.0;
    double S = 1.0;
    double S_sigma = 0.0;
    bool squeezing_detected = false;  // false when meas2 exceeds meas3 in every bin
    std::vector<double> S_per_bin;
};

// meas2/meas3 ratio with the unsqueezable cavity and added noise removed.
SqueezingEstimate infer_squeezing(const RawSpectrum& meas2, const RawSpectrum& meas3, double eta,
                                  const CavityGeometry& geometry);

struct CalibrationResult {
    int step_id = 0;
    double nu_c = 0.0;
    double beta = 0.0;
    double kappa_l = 0.0;
    double N_f = 0.0;
    double eta = 0.0;
    double G_s_hat = 1.0, G_s_sigma = 0.0;
    double S_hat = 1.0, S_sigma = 0.0;
    double N_c0_hat = 0.0, N_c0_sigma = 0.0;
    double N_A_hat = 0.0, N_A_sigma = 0.0;
    double gain_hat_db = 0.0, gain_sigma_db = 0.0;
    bool squeezing_detected = false;
    bool cavity_noise_physical = true;

    // Receiver model at the calibrated operating point.
    ReceiverParams receiver() const;
};

// Full protocol: hot/cold -> N_A, meas1/meas3 -> N_c0, meas2/meas3 -> S, G_s.
// Cavity geometry comes from the step metadata; N_f from the cold load.
CalibrationResult calibrate(const CalibrationSet& set, double eta);

// Nearest calibration (by step id) for every step; ties go to the earlier one.
const CalibrationResult& nearest_calibration(const std::vector<CalibrationResult>& results,
                                             int step_id);

}  // namespace haloscan
