#pragma once

// Bayesian power-measured exclusion: per-bin prior updates, their product over
// scans, the look-elsewhere aggregate and windowed subaggregates.

#include "haloscan/pipeline.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace haloscan {

// ln u = mu x - mu^2 / 2
double log_prior_update(double x, double mu);
double prior_update(double x, double mu);

// Elementwise product; NaN entries of a rescan mean "not rescanned".
std::vector<double> combine_updates(std::span<const double> initial,
                                    std::span<const std::vector<double>> rescans);

// Arithmetic mean. Throws DomainError on an empty set.
double aggregate(std::span<const double> U);

// Same mean from ln U values, computed with log-sum-exp.
double aggregate_log(std::span<const double> log_U);

// n points log-spaced over [g_min, g_max].
std::vector<double> coupling_grid(double g_min, double g_max, int n);

// One scan's view of the analysed bins: standardized excess and sensitivity.
// A bin the scan did not cover has x = NaN.
struct UpdateLayer {
    std::vector<double> x;
    std::vector<double> eta;
};

class UpdateField {
public:
    explicit UpdateField(std::vector<UpdateLayer> layers);

    std::size_t size() const { return n_; }

    // ln U_i(g) summed over layers, for every bin.
    void log_U(double g, std::span<double> out) const;

    // Aggregate over bins [begin, end).
    double aggregate(double g, std::size_t begin, std::size_t end) const;
    double aggregate(double g) const { return aggregate(g, 0, n_); }

private:
    std::size_t n_ = 0;
    std::vector<UpdateLayer> layers_;
};

// Bins [lo, hi) of each window; remainder goes one bin each to the first windows.
std::vector<std::pair<std::size_t, std::size_t>> partition_windows(std::size_t n_bins,
                                                                   std::size_t n_windows);

// First crossing of target on the grid, refined by bisection until the
// bracket is narrower than tolerance. Empty when the grid never crosses.
std::optional<double> bisect_crossing(const std::function<double(double)>& U,
                                      std::span<const double> g_grid,
                                      std::span<const double> U_grid, double target,
                                      double tolerance);

struct ExclusionSettings {
    double g_min = 0.5;
    double g_max = 5.0;
    int n_grid = 200;
    double target = 0.1;
    int n_windows = 100;
    double tolerance = 1e-10;

    void validate() const;
};

struct WindowResult {
    double nu_lo = 0.0;
    double nu_hi = 0.0;
    std::size_t n_bins = 0;
    std::vector<double> U;
    std::optional<double> g_target;
};

struct ExclusionResult {
    double target = 0.1;
    std::size_t n_bins = 0;
    std::vector<double> g_grid;
    std::vector<double> aggregate_U;
    std::optional<double> g_star;
    std::vector<WindowResult> windows;
};

// nu[i] labels bin i of the field (used for window edges).
ExclusionResult exclusion(const UpdateField& field, std::span<const double> nu,
                          const ExclusionSettings& settings);

// Bins of the initial grand spectrum that are valid and whose candidate
// frequency lies in window, with every rescan aligned onto them by frequency.
struct AnalysedBins {
    std::vector<double> nu;
    UpdateField field;
};

AnalysedBins analysed_bins(const GrandSpectrum& initial, std::span<const GrandSpectrum> rescans,
                           const FrequencyWindow& window);

}  // namespace haloscan
