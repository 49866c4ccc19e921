#include "haloscan/pipeline.hpp"

#include "haloscan/errors.hpp"
#include "haloscan/savgol.hpp"
#include "haloscan/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

namespace haloscan {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// (H v)_i = sum_k h_k v_{i + k - half}, zero outside v.
std::vector<double> apply_taps(std::span<const double> taps, std::span<const double> v) {
    const auto n = static_cast<long>(v.size());
    const auto w = static_cast<long>(taps.size());
    const long half = w / 2;
    std::vector<double> out(v.size(), 0.0);
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long k = std::max(0L, half - i); k < w && i + k - half < n; ++k) {
            acc += taps[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(i + k - half)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void check_same_band(std::span<const RawSpectrum> spectra) {
    if (spectra.empty()) throw DomainError("no spectra survived the cuts; the campaign is empty");
    const std::size_t n = spectra.front().psd.size();
    const double bw = spectra.front().bin_width;
    for (const auto& s : spectra) {
        if (s.psd.size() != n || s.bin_width != bw) {
            throw DomainError("spectra disagree on the IF band layout");
        }
    }
}

}  // namespace

CutResult apply_cuts(std::vector<RawSpectrum> spectra, const CutCriteria& criteria) {
    CutResult out;
    out.log.n_input = spectra.size();
    for (auto& s : spectra) {
        const SpectrumMeta& m = s.meta;
        CutEntry e{s.step_id, m.pass, "", 0.0};
        if (std::abs(m.drift_hz) > criteria.max_drift_hz) {
            e.reason = "drift";
            e.value = m.drift_hz;
        } else if (criteria.squeezing_expected && m.squeezing_db < criteria.min_squeezing_db) {
            e.reason = "squeezing";
            e.value = m.squeezing_db;
        } else if (std::abs(m.probe_power_db) > criteria.probe_window_db) {
            e.reason = "probe_power";
            e.value = m.probe_power_db;
        }
        if (e.reason.empty()) {
            out.kept.push_back(std::move(s));
        } else {
            out.log.entries.push_back(std::move(e));
        }
    }
    out.log.n_kept = out.kept.size();
    return out;
}

void FilterSettings::validate(double bin_width, std::size_t n_bins) const {
    const int w_if = SavitzkyGolay::window_bins(if_window_hz, bin_width);
    const int w_rf = SavitzkyGolay::window_bins(rf_window_hz, bin_width);
    if (static_cast<std::size_t>(std::max(w_if, w_rf)) > n_bins) {
        throw DomainError("filters: Savitzky-Golay window exceeds the band of " +
                          std::to_string(n_bins) + " bins");
    }
    if (!(edge_trim_hz >= 0) || 2.0 * edge_trim_hz >= static_cast<double>(n_bins) * bin_width) {
        throw DomainError("filters: edge trim leaves no bins");
    }
    if (!(if_spike_sigma > 0)) throw DomainError("filters: spike threshold must be positive");
    // Constructors check order against window.
    SavitzkyGolay(w_if, if_order);
    SavitzkyGolay(w_rf, rf_order);
}

IfBaseline estimate_if_baseline(std::span<const RawSpectrum> spectra, const FilterSettings& filters) {
    check_same_band(spectra);
    const std::size_t n = spectra.front().psd.size();
    const double bw = spectra.front().bin_width;
    filters.validate(bw, n);

    std::vector<double> avg(n, 0.0);
    for (const auto& s : spectra) {
        const double mean = std::accumulate(s.psd.begin(), s.psd.end(), 0.0) / static_cast<double>(n);
        if (!(mean > 0)) throw NumericError("IF baseline: spectrum with non-positive mean power");
        for (std::size_t j = 0; j < n; ++j) avg[j] += s.psd[j] / mean;
    }
    const double count = static_cast<double>(spectra.size());
    for (double& v : avg) v /= count;

    IfBaseline out;
    out.n_spectra = static_cast<int>(spectra.size());
    const SavitzkyGolay sg(SavitzkyGolay::window_bins(filters.if_window_hz, bw), filters.if_order);
    out.shape = sg.smooth(avg);
    out.masked.assign(n, 0);
    const double sigma =
        1.0 / std::sqrt(static_cast<double>(spectra.front().n_averages) * count);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(out.shape[j] > 0)) throw NumericError("IF baseline: non-positive smoothed power");
        const double resid = avg[j] / out.shape[j] - 1.0;
        if (std::abs(resid) > filters.if_spike_sigma * sigma) out.masked[j] = 1;
    }
    return out;
}

StructureRemoval remove_structure(std::span<const RawSpectrum> spectra, const FilterSettings& filters,
                                  const IfBaseline* if_baseline) {
    check_same_band(spectra);
    const std::size_t n = spectra.front().psd.size();
    const double bw = spectra.front().bin_width;
    filters.validate(bw, n);

    StructureRemoval out;
    out.if_baseline = if_baseline ? *if_baseline : estimate_if_baseline(spectra, filters);
    const IfBaseline& ifb = out.if_baseline;
    if (ifb.shape.size() != n) throw DomainError("IF baseline does not match the spectra");

    const int w_rf = SavitzkyGolay::window_bins(filters.rf_window_hz, bw);
    const SavitzkyGolay rf(w_rf, filters.rf_order);
    const auto trim = static_cast<std::size_t>(std::lround(filters.edge_trim_hz / bw));
    const std::string if_tag = "if_savgol(" + std::to_string(SavitzkyGolay::window_bins(filters.if_window_hz, bw)) +
                               "," + std::to_string(filters.if_order) + ")";
    const std::string rf_tag = "rf_savgol(" + std::to_string(w_rf) + "," + std::to_string(filters.rf_order) + ")";

    out.spectra.resize(spectra.size());
    const auto m = static_cast<long long>(spectra.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long long k = 0; k < m; ++k) {
        try {
            const RawSpectrum& raw = spectra[static_cast<std::size_t>(k)];
            ProcessedSpectrum& p = out.spectra[static_cast<std::size_t>(k)];
            p.step_id = raw.step_id;
            p.pass = raw.meta.pass;
            p.nu_start = raw.nu_start;
            p.bin_width = raw.bin_width;
            p.nu_c = raw.meta.nu_c;
            p.beta = raw.meta.beta;
            p.Q_L = raw.meta.Q_L;
            p.filters = {if_tag, rf_tag};

            std::vector<double> z(n);
            for (std::size_t j = 0; j < n; ++j) z[j] = raw.psd[j] / ifb.shape[j];
            const std::vector<double> b = rf.smooth(z);
            p.excess.resize(n);
            double sum = 0.0;
            double sum2 = 0.0;
            std::size_t used = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j < trim || j >= n - trim || ifb.masked[j]) {
                    p.excess[j] = kNaN;
                    continue;
                }
                const double e = z[j] / b[j] - 1.0;
                p.excess[j] = e;
                sum += e;
                sum2 += e * e;
                ++used;
            }
            if (used < 2) throw NumericError("structure removal left fewer than two bins");
            const double mean = sum / static_cast<double>(used);
            p.sigma = std::sqrt((sum2 - used * mean * mean) / static_cast<double>(used - 1));
            if (!(p.sigma > 0) || !std::isfinite(p.sigma)) {
                throw NumericError("structure removal: degenerate excess spectrum for step " +
                                   std::to_string(p.step_id));
            }
        } catch (...) {
#pragma omp critical(haloscan_pipeline_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

FilterTransfer filter_transfer(std::span<const double> kernel, const FilterSettings& filters,
                               double bin_width, int n_if, bool in_if_average) {
    const SavitzkyGolay rf(SavitzkyGolay::window_bins(filters.rf_window_hz, bin_width), filters.rf_order);
    const SavitzkyGolay ifs(SavitzkyGolay::window_bins(filters.if_window_hz, bin_width), filters.if_order);
    if (in_if_average && n_if < 1) throw DomainError("filter_transfer: empty IF average");
    const std::size_t pad = static_cast<std::size_t>(rf.window() + ifs.window());
    const double self = in_if_average ? 1.0 / n_if : 0.0;
    // Variance weight of the other spectra's noise entering through the IF baseline.
    double others = 0.0;
    if (n_if > 0) others = in_if_average ? (n_if - 1.0) / (double(n_if) * n_if) : 1.0 / n_if;

    // A v = (I - H_RF)(I - self H_IF) v,  B v = (I - H_RF) H_IF v
    auto response = [&](std::span<const double> v, std::vector<double>& a, std::vector<double>& b) {
        std::vector<double> z(v.size() + 2 * pad, 0.0);
        std::copy(v.begin(), v.end(), z.begin() + static_cast<long>(pad));
        const std::vector<double> hz = apply_taps(ifs.taps(), z);
        a = z;
        for (std::size_t i = 0; i < z.size(); ++i) a[i] -= self * hz[i];
        const std::vector<double> ha = apply_taps(rf.taps(), a);
        for (std::size_t i = 0; i < z.size(); ++i) a[i] -= ha[i];
        b = hz;
        const std::vector<double> hb = apply_taps(rf.taps(), b);
        for (std::size_t i = 0; i < z.size(); ++i) b[i] -= hb[i];
        return z;
    };

    std::vector<double> a, b;
    const std::vector<double> z = response(kernel, a, b);
    const double pp = dot(z, z);
    if (!(pp > 0)) throw DomainError("filter_transfer: empty kernel");
    const double signal_noise = dot(a, a) + others * dot(b, b);

    const double delta[] = {1.0};
    std::vector<double> da, db;
    response(delta, da, db);
    const double white = dot(da, da) + others * dot(db, db);

    FilterTransfer out;
    out.transfer = dot(z, a) / pp;
    out.noise_factor = std::sqrt(signal_noise / (pp * white));
    return out;
}

std::vector<double> expected_signal(const ProcessedSpectrum& s, const CalibrationResult& cal,
                                    double snr_ref, const LineshapeParams& lineshape) {
    ReceiverParams rx = cal.receiver();
    rx.nu_c = s.nu_c;
    rx.beta = s.beta;
    if (!(s.Q_L > 0)) throw DomainError("expected_signal: spectrum lacks a loaded Q");
    rx.kappa_l = s.nu_c / s.Q_L / (1.0 + s.beta);
    LineshapeParams ls = lineshape;
    ls.bin_width = s.bin_width;
    const double a_ref = signal_peak_per_g2(AxionHypothesis{s.nu_c, 1.0, snr_ref}, ls);
    std::vector<double> v(s.excess.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double d = s.nu_start + (static_cast<double>(j) + 0.5) * s.bin_width - rx.nu_c;
        v[j] = a_ref * cavity_absorption(d, rx.kappa_l, rx.beta) / total_noise(rx, d);
    }
    return v;
}

CombinedSpectrum combine_spectra(std::span<const ProcessedSpectrum> spectra,
                                 const std::vector<CalibrationResult>& calibrations,
                                 double snr_ref, const LineshapeParams& lineshape,
                                 std::span<const FrequencyWindow> skips,
                                 std::optional<double> grid_origin) {
    if (spectra.empty()) throw DomainError("combine_spectra: no spectra to combine");
    const double bw = spectra.front().bin_width;
    double origin = grid_origin.value_or(std::numeric_limits<double>::infinity());
    if (!grid_origin) {
        for (const auto& s : spectra) origin = std::min(origin, s.nu_start);
    }

    std::vector<long> offsets(spectra.size());
    long length = 0;
    for (std::size_t k = 0; k < spectra.size(); ++k) {
        const auto& s = spectra[k];
        if (s.bin_width != bw) throw DomainError("combine_spectra: mixed bin widths");
        const double exact = (s.nu_start - origin) / bw;
        const long off = std::lround(exact);
        if (off < 0 || std::abs(exact - static_cast<double>(off)) > 1e-6) {
            throw DomainError("combine_spectra: spectrum of step " + std::to_string(s.step_id) +
                              " is not on the common bin grid");
        }
        offsets[k] = off;
        length = std::max(length, off + static_cast<long>(s.excess.size()));
    }

    const auto n = static_cast<std::size_t>(length);
    std::vector<double> num(n, 0.0);
    std::vector<double> den(n, 0.0);
    std::vector<int> count(n, 0);
    const auto& kern = simd::kernels();
    // Fixed summation order: spectra in input order.
    for (std::size_t k = 0; k < spectra.size(); ++k) {
        const auto& s = spectra[k];
        const CalibrationResult& cal = nearest_calibration(calibrations, s.step_id);
        const std::vector<double> v = expected_signal(s, cal, snr_ref, lineshape);
        const double inv_var = 1.0 / (s.sigma * s.sigma);
        std::vector<double> e(s.excess.size());
        std::vector<double> w(s.excess.size());
        for (std::size_t j = 0; j < e.size(); ++j) {
            const bool ok = std::isfinite(s.excess[j]);
            e[j] = ok ? s.excess[j] : 0.0;
            w[j] = ok ? inv_var : 0.0;
            if (ok && v[j] > 0) ++count[static_cast<std::size_t>(offsets[k]) + j];
        }
        const auto off = static_cast<std::size_t>(offsets[k]);
        kern.accumulate_ml(e, v, w, std::span<double>(num).subspan(off, e.size()),
                           std::span<double>(den).subspan(off, e.size()));
    }

    CombinedSpectrum out;
    out.nu_start = origin;
    out.bin_width = bw;
    out.y.resize(n);
    out.var.resize(n);
    out.n_contrib = std::move(count);
    for (std::size_t i = 0; i < n; ++i) {
        const double centre = origin + (static_cast<double>(i) + 0.5) * bw;
        const bool skipped = std::any_of(skips.begin(), skips.end(),
                                         [&](const FrequencyWindow& w) { return w.contains(centre); });
        if (den[i] > 0 && !skipped) {
            out.y[i] = num[i] / den[i];
            out.var[i] = 1.0 / den[i];
        } else {
            out.y[i] = kNaN;
            out.var[i] = std::numeric_limits<double>::infinity();
            out.n_contrib[i] = 0;
        }
    }
    return out;
}

GrandSpectrum coadd_grand(const CombinedSpectrum& combined, std::span<const double> kernel,
                          const FilterTransfer& filters) {
    const std::size_t n = combined.size();
    const std::size_t k = kernel.size();
    if (k == 0) throw DomainError("coadd_grand: empty kernel");
    GrandSpectrum out;
    out.nu_start = combined.nu_start;
    out.bin_width = combined.bin_width;
    out.transfer = filters.transfer;
    out.noise_factor = filters.noise_factor;
    out.x.assign(n, kNaN);
    out.eta_sens.assign(n, 0.0);
    out.n_contrib = combined.n_contrib;
    if (n < k) return out;

    std::vector<double> yw(n);
    std::vector<double> w(n);
    std::vector<std::size_t> missing(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const bool ok = std::isfinite(combined.y[i]);
        w[i] = ok ? 1.0 / combined.var[i] : 0.0;
        yw[i] = ok ? combined.y[i] * w[i] : 0.0;
        missing[i + 1] = missing[i] + (ok ? 0 : 1);
    }
    std::vector<double> p2(k);
    for (std::size_t j = 0; j < k; ++j) p2[j] = kernel[j] * kernel[j];

    const std::size_t m = n - k + 1;
    std::vector<double> num(m);
    std::vector<double> den(m);
    const auto& kern = simd::kernels();
    kern.correlate(yw, kernel, num);
    kern.correlate(w, p2, den);

    for (std::size_t a = 0; a < m; ++a) {
        if (missing[a + k] != missing[a] || !(den[a] > 0)) continue;
        const double root = std::sqrt(den[a]);
        out.x[a] = num[a] / den[a] * root / filters.noise_factor;
        out.eta_sens[a] = filters.transfer * root / filters.noise_factor;
    }
    return out;
}

std::vector<RescanCandidate> flag_rescans(const GrandSpectrum& grand, double threshold,
                                          std::size_t merge_bins) {
    std::vector<RescanCandidate> out;
    bool open = false;
    std::size_t last = 0;
    for (std::size_t i = 0; i < grand.size(); ++i) {
        const double x = grand.x[i];
        if (!(x >= threshold)) continue;
        if (open && i - last < merge_bins) {
            if (x > out.back().x) out.back() = {grand.nu_at(i), x, i};
        } else {
            out.push_back({grand.nu_at(i), x, i});
            open = true;
        }
        last = i;
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RescanCandidate& a, const RescanCandidate& b) { return a.x > b.x; });
    return out;
}

std::size_t lineshape_extent_bins(std::span<const double> kernel) {
    double total = 0.0;
    for (double v : kernel) total += v;
    double acc = 0.0;
    for (std::size_t k = 0; k < kernel.size(); ++k) {
        acc += kernel[k];
        if (acc >= 0.95 * total) return k + 1;
    }
    return kernel.size();
}

}  // namespace haloscan
