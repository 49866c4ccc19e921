#pragma once

// Raw spectra -> standardized grand spectrum.
//
// Bins of every processed/combined/grand spectrum are indexed by their lower
// edge nu_start + j * bin_width. A candidate axion at bin a has its lineshape
// kernel starting at bin a.

#include "haloscan/calibration.hpp"
#include "haloscan/campaign_sim.hpp"

#include <optional>
#include <string>
#include <vector>

namespace haloscan {

struct CutCriteria {
    double max_drift_hz = 20.0e3;
    double min_squeezing_db = 1.0;  // only applied when squeezing is expected
    bool squeezing_expected = true;
    double probe_window_db = 1.0;   // |probe power - nominal| allowed
};

struct CutEntry {
    int step_id = 0;
    int pass = 0;
    std::string reason;  // "drift", "squeezing" or "probe_power"
    double value = 0.0;
};

struct CutLog {
    std::size_t n_input = 0;
    std::size_t n_kept = 0;
    std::vector<CutEntry> entries;
};

struct CutResult {
    std::vector<RawSpectrum> kept;
    CutLog log;
};

// First failing rule wins, checked in the order drift, squeezing, probe power.
CutResult apply_cuts(std::vector<RawSpectrum> spectra, const CutCriteria& criteria);

struct FilterSettings {
    double if_window_hz = 10.0e3;
    int if_order = 4;
    double rf_window_hz = 100.0e3;
    int rf_order = 4;
    double if_spike_sigma = 6.0;  // IF bins whose averaged residual exceeds this are masked
    double edge_trim_hz = 50.0e3; // dropped at both ends of every processed spectrum

    void validate(double bin_width, std::size_t n_bins) const;
};

// Shared IF-band structure: the smoothed mean of all mean-normalised kept
// spectra, plus bins rejected by the spike rule.
struct IfBaseline {
    std::vector<double> shape;
    std::vector<unsigned char> masked;
    int n_spectra = 0;
};

IfBaseline estimate_if_baseline(std::span<const RawSpectrum> spectra, const FilterSettings& filters);

struct ProcessedSpectrum {
    int step_id = 0;
    int pass = 0;
    double nu_start = 0.0;
    double bin_width = 100.0;
    double nu_c = 0.0;
    double beta = 0.0;
    double Q_L = 0.0;
    std::vector<double> excess;  // NaN where trimmed or masked
    double sigma = 0.0;          // sample std of the finite excess bins
    std::vector<std::string> filters;
};

struct StructureRemoval {
    std::vector<ProcessedSpectrum> spectra;
    IfBaseline if_baseline;
};

// IF stage then RF stage. If if_baseline is given it is applied as is (rescans
// reuse the initial scan's baseline); otherwise it is estimated from spectra.
StructureRemoval remove_structure(std::span<const RawSpectrum> spectra, const FilterSettings& filters,
                                  const IfBaseline* if_baseline = nullptr);

// Response of the filter chain to a lineshape kernel p, for a spectrum
// divided by an IF baseline averaged over n_if spectra.
//   transfer: <p, A p> / <p, p> with A = (I - H_RF)(I - H_IF / n_if) when the
//   spectrum is part of that average, A = I - H_RF otherwise.
//   noise_factor: matched-filter noise relative to white noise of the same
//   per-bin variance, including the noise the IF baseline brings in from the
//   other spectra.
// n_if = 0 means no IF baseline noise at all.
struct FilterTransfer {
    double transfer = 1.0;
    double noise_factor = 1.0;
};

FilterTransfer filter_transfer(std::span<const double> kernel, const FilterSettings& filters,
                               double bin_width, int n_if, bool in_if_average);

struct CombinedSpectrum {
    double nu_start = 0.0;
    double bin_width = 100.0;
    std::vector<double> y;    // estimate of g^2 p_j, NaN where missing
    std::vector<double> var;  // variance of y, +inf where missing
    std::vector<int> n_contrib;

    std::size_t size() const { return y.size(); }
};

// Expected excess of one processed spectrum per unit g^2 and per unit kernel
// fraction, from the calibrated receiver: A_ref (1 - |Gamma|^2) / total.
std::vector<double> expected_signal(const ProcessedSpectrum& s, const CalibrationResult& cal,
                                    double snr_ref, const LineshapeParams& lineshape);

// Inverse-variance combination with weights proportional to the squared
// expected signal. grid_origin fixes bin 0 (defaults to the lowest nu_start);
// bins inside skip windows are left missing.
CombinedSpectrum combine_spectra(std::span<const ProcessedSpectrum> spectra,
                                 const std::vector<CalibrationResult>& calibrations,
                                 double snr_ref, const LineshapeParams& lineshape,
                                 std::span<const FrequencyWindow> skips = {},
                                 std::optional<double> grid_origin = std::nullopt);

struct GrandSpectrum {
    double nu_start = 0.0;
    double bin_width = 100.0;
    std::vector<double> x;         // NaN where the kernel touches missing bins
    std::vector<double> eta_sens;  // 0 where x is NaN
    std::vector<int> n_contrib;
    double transfer = 1.0;
    double noise_factor = 1.0;

    std::size_t size() const { return x.size(); }
    double nu_at(std::size_t j) const { return nu_start + static_cast<double>(j) * bin_width; }
};

// Matched filter over the lineshape kernel, standardised so that an axion at
// coupling g gives E[x] = g^2 eta_sens with unit-variance noise.
GrandSpectrum coadd_grand(const CombinedSpectrum& combined, std::span<const double> kernel,
                          const FilterTransfer& filters);

struct RescanCandidate {
    double nu_hz = 0.0;
    double x = 0.0;
    std::size_t bin = 0;
};

// Bins with x >= threshold; runs closer than merge_bins collapse to their
// maximum. Sorted by decreasing x.
std::vector<RescanCandidate> flag_rescans(const GrandSpectrum& grand, double threshold,
                                          std::size_t merge_bins);

// Bins from the kernel start that hold 95% of its power; the merge distance.
std::size_t lineshape_extent_bins(std::span<const double> kernel);

}  // namespace haloscan
