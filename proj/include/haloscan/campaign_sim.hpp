#pragma once

// Synthetic haloscope data: tuning plans, averaged power spectra with
// radiometer fluctuations and baseline structure, and calibration sets.

#include "haloscan/axion_model.hpp"
#include "haloscan/receiver_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace haloscan {

struct FrequencyWindow {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double nu) const { return nu >= lo && nu <= hi; }
};

struct TuningStep {
    int step_id = 0;
    double nu_c = 0.0;
    double beta = 0.0;
    std::uint64_t seed = 0;
};

struct TuningPlan {
    std::vector<TuningStep> steps;
    std::vector<FrequencyWindow> skip_windows;

    bool skipped(double nu) const;
};

// Uniform steps lo, lo + step, ... <= hi, dropping those inside a skip window.
// Cavity frequencies are snapped to multiples of grid_hz when grid_hz > 0.
// Throws DomainError when nothing is left.
TuningPlan make_tuning_plan(double lo, double hi, double step, std::vector<FrequencyWindow> skips,
                            double beta, std::uint64_t master_seed, double grid_hz = 0.0);

struct AcquisitionSettings {
    double tau_s = 3600.0;
    double bin_width = 100.0;   // Hz
    double segment_s = 0.01;    // FFT segment length; must equal 1 / bin_width
    std::size_t n_bins = 30000; // analysis band = n_bins * bin_width

    long long n_averages() const;
    double relative_sigma() const;
    double band_width() const { return static_cast<double>(n_bins) * bin_width; }
    void validate() const;
};

struct CosineComponent {
    double amplitude = 0.0;
    double period_hz = 1.0e6;
    double phase = 0.0;
};

// Smooth multiplicative transfer function. The shared part is a property of
// the IF chain and identical for every spectrum; each step adds a small slow
// variation of its own.
struct BaselineModel {
    std::vector<CosineComponent> shared;
    double per_step_amplitude = 0.03;
    double per_step_min_period_hz = 1.5e6;
    double per_step_max_period_hz = 6.0e6;

    // Random 3-5 component baseline whose summed amplitudes equal excursion.
    static BaselineModel generate(std::uint64_t seed, double excursion = 0.3);
    static BaselineModel flat();

    std::vector<double> evaluate(std::size_t n_bins, double bin_width, std::uint64_t step_seed) const;
};

enum class Anomaly { none = 0, drift = 1, gain_sag = 2, probe_power = 3 };

struct AnomalySettings {
    double rate = 0.0;             // probability that a step carries an anomaly
    double drift_hz = 200.0e3;     // cavity drift over the acquisition
    double sag_G_s = 0.8;          // squeezer output when the JPA misbehaves
    double probe_offset_db = -3.0; // probe tone power excursion

    Anomaly draw(std::uint64_t step_seed) const;
};

struct SpectrumMeta {
    double nu_c = 0.0;             // cavity frequency reported for the step
    double beta = 0.0;
    double Q_L = 0.0;
    double drift_hz = 0.0;
    double probe_power_db = 0.0;   // relative to nominal
    double squeezing_db = 0.0;     // -10 log10 S measured for the step
    double cavity_offset_hz = 0.0; // cavity detuning from band centre (calibration only)
    double load_temperature_k = 0.0;
    double acquisition_time_s = 0.0;
    int squeezer_on = 0;
    int anomaly = 0;               // injected anomaly code (simulation truth)
    int pass = 0;                  // 0 initial scan, 1 rescan
};

struct RawSpectrum {
    int step_id = 0;
    std::string label = "data";
    double nu_start = 0.0;
    double bin_width = 100.0;
    long long n_averages = 0;
    SpectrumMeta meta;
    std::vector<double> psd;

    double nu_at(std::size_t j) const { return nu_start + static_cast<double>(j) * bin_width; }
};

struct CalibrationSet {
    int step_id = 0;
    RawSpectrum meas1;  // off resonance, squeezer off
    RawSpectrum meas2;  // on resonance, squeezer on
    RawSpectrum meas3;  // on resonance, squeezer off
    RawSpectrum hot;
    RawSpectrum cold;
    double T_hot = 0.333;
    double T_cold = 0.061;
};

struct SimulationSetup {
    ReceiverParams receiver;  // nu_c, kappa_l, beta and N_f are set per step
    bool squeezing = true;
    double unloaded_q = 47000.0;
    double base_temperature_k = 0.061;
    double hot_load_k = 0.333;
    double calibration_offset_linewidths = 10.0;
    int calibration_interval = 9;
    LineshapeParams lineshape;
    AcquisitionSettings acquisition;
    BaselineModel baseline;
    AnomalySettings anomalies;
    std::vector<AxionHypothesis> injections;
    int literal_segments = 0;  // > 0 switches to time-domain segment generation
};

// Truth receiver of a step: kappa_l from the unloaded Q, N_f from the base
// temperature, squeezer output forced to 1 when squeezing is disabled.
ReceiverParams step_receiver(const SimulationSetup& setup, const TuningStep& step);

double chain_gain(const ReceiverParams& receiver);

// Averaged PSD of one step: gain * B_j * (total_j (1 + eps_j) + S_ax,j) with
// eps_j ~ N(0, 1/sqrt(n_averages)). Throws DomainError if a hypothesis lies
// outside the band widened by the lineshape span.
RawSpectrum simulate_spectrum(const TuningStep& step, const ReceiverParams& receiver,
                              std::span<const AxionHypothesis> hypotheses,
                              const LineshapeParams& lineshape, const BaselineModel& baseline,
                              const AcquisitionSettings& acq, std::uint64_t seed,
                              std::optional<std::uint64_t> baseline_seed = std::nullopt);

// Same expected spectrum, built by Fourier transforming n_segments complex
// white-noise segments of n_bins samples and averaging the periodograms.
RawSpectrum simulate_spectrum_literal(const TuningStep& step, const ReceiverParams& receiver,
                                      std::span<const AxionHypothesis> hypotheses,
                                      const LineshapeParams& lineshape,
                                      const BaselineModel& baseline, const AcquisitionSettings& acq,
                                      int n_segments, std::uint64_t seed);

CalibrationSet simulate_calibration(const TuningStep& step, const SimulationSetup& setup,
                                    std::uint64_t seed);

// All steps of a scan pass (0 initial, 1 rescan), anomalies included.
// Parallel over steps; each step's randomness depends only on its seed.
std::vector<RawSpectrum> simulate_scan(const SimulationSetup& setup,
                                       std::span<const TuningStep> steps, int pass);

// Calibration sets for every calibration_interval-th step of the plan.
std::vector<CalibrationSet> simulate_calibrations(const SimulationSetup& setup,
                                                  const TuningPlan& plan);

}  // namespace haloscan
