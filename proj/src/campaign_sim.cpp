#include "haloscan/campaign_sim.hpp"

#include "haloscan/errors.hpp"
#include "haloscan/rng.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

namespace haloscan {
namespace {

// Stream labels for derive_seed.
enum : std::uint64_t {
    kNoiseStream = 1,
    kBaselineStream = 2,
    kAnomalyStream = 3,
    kCalibrationStream = 4,
};

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void check_hypotheses(std::span<const AxionHypothesis> hyps, const LineshapeParams& ls,
                      double nu_start, const AcquisitionSettings& acq) {
    const double nu_end = nu_start + acq.band_width();
    const double span = ls.span_bins * ls.bin_width;
    for (const auto& h : hyps) {
        h.validate();
        if (h.nu_a < nu_start - span || h.nu_a > nu_end) {
            throw DomainError("simulate_spectrum: hypothesis at " + std::to_string(h.nu_a) +
                              " Hz lies outside the simulated band");
        }
    }
}

bool touches_band(const AxionHypothesis& h, const LineshapeParams& ls, double nu_start,
                  const AcquisitionSettings& acq) {
    const double span = ls.span_bins * ls.bin_width;
    return h.nu_a >= nu_start - span && h.nu_a <= nu_start + acq.band_width();
}

double band_start(double nu_c, const AcquisitionSettings& acq) {
    return nu_c - static_cast<double>(acq.n_bins / 2) * acq.bin_width;
}

// Expected PSD before gain and baseline: total noise plus injected signals.
std::vector<double> expected_quanta(const ReceiverParams& rx, std::span<const AxionHypothesis> hyps,
                                    const LineshapeParams& ls, double nu_start,
                                    const AcquisitionSettings& acq, std::vector<double>* signal) {
    const std::size_t n = acq.n_bins;
    std::vector<double> total(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double centre = nu_start + (static_cast<double>(j) + 0.5) * acq.bin_width;
        total[j] = total_noise(rx, centre - rx.nu_c);
    }
    signal->assign(n, 0.0);
    LineshapeParams grid = ls;
    grid.bin_width = acq.bin_width;
    for (const auto& h : hyps) {
        const std::vector<double> s = signal_spectrum(h, rx, grid, nu_start, n);
        for (std::size_t j = 0; j < n; ++j) (*signal)[j] += s[j];
    }
    return total;
}

SpectrumMeta base_meta(const ReceiverParams& rx, const TuningStep& step) {
    SpectrumMeta m;
    m.nu_c = step.nu_c;
    m.beta = rx.beta;
    m.Q_L = rx.loaded_q();
    m.squeezing_db = -10.0 * std::log10(rx.squeezing());
    m.squeezer_on = rx.G_s != 1.0 ? 1 : 0;
    return m;
}

}  // namespace

bool TuningPlan::skipped(double nu) const {
    return std::any_of(skip_windows.begin(), skip_windows.end(),
                       [nu](const FrequencyWindow& w) { return w.contains(nu); });
}

TuningPlan make_tuning_plan(double lo, double hi, double step, std::vector<FrequencyWindow> skips,
                            double beta, std::uint64_t master_seed, double grid_hz) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi)) {
        throw DomainError("tuning plan: need lo <= hi");
    }
    if (!(step > 0)) throw DomainError("tuning plan: step must be positive");
    TuningPlan plan;
    plan.skip_windows = std::move(skips);
    const auto n = static_cast<long long>(std::floor((hi - lo) / step * (1.0 + 1e-12))) + 1;
    for (long long k = 0; k < n; ++k) {
        double nu = lo + static_cast<double>(k) * step;
        if (grid_hz > 0) nu = std::round(nu / grid_hz) * grid_hz;
        if (plan.skipped(nu)) continue;
        plan.steps.push_back(TuningStep{static_cast<int>(k), nu, beta,
                                        derive_seed(master_seed, {static_cast<std::uint64_t>(k)})});
    }
    if (plan.steps.empty()) throw DomainError("tuning plan: range is fully skipped");
    return plan;
}

long long AcquisitionSettings::n_averages() const { return std::llround(tau_s / segment_s); }

double AcquisitionSettings::relative_sigma() const {
    return 1.0 / std::sqrt(static_cast<double>(n_averages()));
}

void AcquisitionSettings::validate() const {
    if (!(tau_s > 0 && segment_s > 0 && bin_width > 0)) {
        throw DomainError("acquisition: tau, segment and bin width must be positive");
    }
    if (std::abs(bin_width * segment_s - 1.0) > 1e-9) {
        throw DomainError("acquisition: bin width must equal 1 / segment length");
    }
    if (n_bins < 16) throw DomainError("acquisition: analysis band too small");
}

BaselineModel BaselineModel::generate(std::uint64_t seed, double excursion) {
    Rng rng(derive_seed(seed, {kBaselineStream}));
    std::uniform_int_distribution<int> count(3, 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    BaselineModel b;
    const int n = count(rng);
    std::vector<double> weights(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (double& w : weights) {
        w = 0.3 + unit(rng);
        sum += w;
    }
    for (int k = 0; k < n; ++k) {
        CosineComponent c;
        c.amplitude = excursion * weights[static_cast<std::size_t>(k)] / sum;
        // Periods between 0.5 and 8 MHz, log-uniform.
        c.period_hz = 0.5e6 * std::pow(16.0, unit(rng));
        c.phase = 2.0 * std::numbers::pi * unit(rng);
        b.shared.push_back(c);
    }
    return b;
}

BaselineModel BaselineModel::flat() {
    BaselineModel b;
    b.per_step_amplitude = 0.0;
    return b;
}

std::vector<double> BaselineModel::evaluate(std::size_t n_bins, double bin_width,
                                            std::uint64_t step_seed) const {
    std::vector<CosineComponent> local;
    if (per_step_amplitude > 0) {
        Rng rng(derive_seed(step_seed, {kBaselineStream}));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double ratio = per_step_max_period_hz / per_step_min_period_hz;
        for (int k = 0; k < 2; ++k) {
            local.push_back({0.5 * per_step_amplitude,
                             per_step_min_period_hz * std::pow(ratio, unit(rng)),
                             2.0 * std::numbers::pi * unit(rng)});
        }
    }
    std::vector<double> b(n_bins);
    for (std::size_t j = 0; j < n_bins; ++j) {
        const double f = static_cast<double>(j) * bin_width;
        double shared_part = 1.0;
        for (const auto& c : shared) {
            shared_part += c.amplitude * std::cos(2.0 * std::numbers::pi * f / c.period_hz + c.phase);
        }
        double step_part = 1.0;
        for (const auto& c : local) {
            step_part += c.amplitude * std::cos(2.0 * std::numbers::pi * f / c.period_hz + c.phase);
        }
        b[j] = shared_part * step_part;
    }
    return b;
}

Anomaly AnomalySettings::draw(std::uint64_t step_seed) const {
    if (rate <= 0) return Anomaly::none;
    Rng rng(derive_seed(step_seed, {kAnomalyStream}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) >= rate) return Anomaly::none;
    std::uniform_int_distribution<int> kind(1, 3);
    return static_cast<Anomaly>(kind(rng));
}

ReceiverParams step_receiver(const SimulationSetup& setup, const TuningStep& step) {
    ReceiverParams rx = setup.receiver;
    rx.nu_c = step.nu_c;
    rx.beta = step.beta;
    rx.kappa_l = step.nu_c / setup.unloaded_q;
    rx.N_f = thermal_quanta(step.nu_c, setup.base_temperature_k);
    if (!setup.squeezing) rx.G_s = 1.0;
    return rx;
}

double chain_gain(const ReceiverParams& receiver) { return db_to_linear(receiver.G_A_db); }

RawSpectrum simulate_spectrum(const TuningStep& step, const ReceiverParams& receiver,
                              std::span<const AxionHypothesis> hypotheses,
                              const LineshapeParams& lineshape, const BaselineModel& baseline,
                              const AcquisitionSettings& acq, std::uint64_t seed,
                              std::optional<std::uint64_t> baseline_seed) {
    receiver.validate();
    acq.validate();
    RawSpectrum out;
    out.step_id = step.step_id;
    out.nu_start = band_start(step.nu_c, acq);
    out.bin_width = acq.bin_width;
    out.n_averages = acq.n_averages();
    out.meta = base_meta(receiver, step);
    check_hypotheses(hypotheses, lineshape, out.nu_start, acq);

    std::vector<double> signal;
    const std::vector<double> total =
        expected_quanta(receiver, hypotheses, lineshape, out.nu_start, acq, &signal);
    const std::vector<double> shape =
        baseline.evaluate(acq.n_bins, acq.bin_width, baseline_seed.value_or(seed));
    const double gain = chain_gain(receiver);

    Rng rng(derive_seed(seed, {kNoiseStream}));
    std::normal_distribution<double> eps(0.0, acq.relative_sigma());
    out.psd.resize(acq.n_bins);
    for (std::size_t j = 0; j < acq.n_bins; ++j) {
        out.psd[j] = gain * shape[j] * (total[j] * (1.0 + eps(rng)) + signal[j]);
    }
    return out;
}

RawSpectrum simulate_spectrum_literal(const TuningStep& step, const ReceiverParams& receiver,
                                      std::span<const AxionHypothesis> hypotheses,
                                      const LineshapeParams& lineshape,
                                      const BaselineModel& baseline, const AcquisitionSettings& acq,
                                      int n_segments, std::uint64_t seed) {
    receiver.validate();
    acq.validate();
    if (n_segments < 1) throw DomainError("literal mode: need at least one segment");
    RawSpectrum out;
    out.step_id = step.step_id;
    out.nu_start = band_start(step.nu_c, acq);
    out.bin_width = acq.bin_width;
    out.n_averages = n_segments;
    out.meta = base_meta(receiver, step);
    check_hypotheses(hypotheses, lineshape, out.nu_start, acq);

    std::vector<double> signal;
    const std::vector<double> total =
        expected_quanta(receiver, hypotheses, lineshape, out.nu_start, acq, &signal);
    const std::vector<double> shape = baseline.evaluate(acq.n_bins, acq.bin_width, seed);
    const double gain = chain_gain(receiver);

    const auto n = static_cast<int>(acq.n_bins);
    using Buffer = std::unique_ptr<fftw_complex[], decltype(&fftw_free)>;
    Buffer in(fftw_alloc_complex(static_cast<std::size_t>(n)), &fftw_free);
    Buffer spec(fftw_alloc_complex(static_cast<std::size_t>(n)), &fftw_free);
    fftw_plan plan;
#pragma omp critical(haloscan_fftw_planner)
    plan = fftw_plan_dft_1d(n, in.get(), spec.get(), FFTW_FORWARD, FFTW_ESTIMATE);

    // Complex baseband samples with unit total variance: |DFT|^2 / n has mean 1
    // in every bin and is exponentially distributed.
    Rng rng(derive_seed(seed, {kNoiseStream}));
    std::normal_distribution<double> white(0.0, std::sqrt(0.5));
    std::vector<double> periodogram(acq.n_bins, 0.0);
    for (int s = 0; s < n_segments; ++s) {
        for (int t = 0; t < n; ++t) {
            in[t][0] = white(rng);
            in[t][1] = white(rng);
        }
        fftw_execute(plan);
        for (int k = 0; k < n; ++k) {
            // FFT bin k is frequency k / n of the sample rate; shift so that the
            // band centre (DC) sits at bin n / 2.
            const int j = (k + n / 2) % n;
            periodogram[static_cast<std::size_t>(j)] +=
                (spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1]) / n;
        }
    }
#pragma omp critical(haloscan_fftw_planner)
    fftw_destroy_plan(plan);

    out.psd.resize(acq.n_bins);
    for (std::size_t j = 0; j < acq.n_bins; ++j) {
        out.psd[j] = gain * shape[j] * (total[j] + signal[j]) * periodogram[j] / n_segments;
    }
    return out;
}

CalibrationSet simulate_calibration(const TuningStep& step, const SimulationSetup& setup,
                                    std::uint64_t seed) {
    const ReceiverParams rx = step_receiver(setup, step);
    const AcquisitionSettings& acq = setup.acquisition;
    CalibrationSet cal;
    cal.step_id = step.step_id;
    cal.T_hot = setup.hot_load_k;
    cal.T_cold = setup.base_temperature_k;

    ReceiverParams off = rx;
    off.G_s = 1.0;
    // The five spectra are taken back to back and share one baseline.
    const std::uint64_t shape_seed = derive_seed(seed, {kCalibrationStream, 0});
    const std::span<const AxionHypothesis> none;

    auto stamp = [&](RawSpectrum s, const char* label, std::uint64_t k) {
        s.label = label;
        s.meta.acquisition_time_s = static_cast<double>(k);
        return s;
    };

    // Measurement 1: cavity tuned away so the whole band sits at least the
    // configured number of loaded linewidths off resonance.
    {
        const double offset = setup.calibration_offset_linewidths * rx.loaded_linewidth() +
                              0.5 * acq.band_width();
        TuningStep detuned = step;
        ReceiverParams shifted = off;
        shifted.nu_c = step.nu_c + offset;
        RawSpectrum s = simulate_spectrum(detuned, shifted, none, setup.lineshape, setup.baseline,
                                          acq, derive_seed(seed, {kCalibrationStream, 1}), shape_seed);
        s.meta.nu_c = step.nu_c;
        s.meta.cavity_offset_hz = offset;
        cal.meas1 = stamp(std::move(s), "meas1", 1);
    }
    cal.meas2 = stamp(simulate_spectrum(step, rx, none, setup.lineshape, setup.baseline, acq,
                                        derive_seed(seed, {kCalibrationStream, 2}), shape_seed),
                      "meas2", 2);
    cal.meas2.meta.squeezer_on = 1;
    cal.meas3 = stamp(simulate_spectrum(step, off, none, setup.lineshape, setup.baseline, acq,
                                        derive_seed(seed, {kCalibrationStream, 3}), shape_seed),
                      "meas3", 3);
    cal.meas3.meta.squeezer_on = 0;

    // Thermal loads switched in at the AMP input: P = gain B (N_load(T) + N_A).
    auto load = [&](double temperature, std::uint64_t k, const char* label) {
        RawSpectrum s;
        s.step_id = step.step_id;
        s.nu_start = band_start(step.nu_c, acq);
        s.bin_width = acq.bin_width;
        s.n_averages = acq.n_averages();
        s.meta = base_meta(off, step);
        s.meta.load_temperature_k = temperature;
        const std::uint64_t sub = derive_seed(seed, {kCalibrationStream, k});
        const std::vector<double> shape = setup.baseline.evaluate(acq.n_bins, acq.bin_width, shape_seed);
        Rng rng(derive_seed(sub, {kNoiseStream}));
        std::normal_distribution<double> eps(0.0, acq.relative_sigma());
        const double gain = chain_gain(rx);
        s.psd.resize(acq.n_bins);
        for (std::size_t j = 0; j < acq.n_bins; ++j) {
            const double nu = s.nu_start + (static_cast<double>(j) + 0.5) * acq.bin_width;
            s.psd[j] = gain * shape[j] * (thermal_quanta(nu, temperature) + rx.N_A) *
                       (1.0 + eps(rng));
        }
        return stamp(std::move(s), label, k);
    };
    cal.hot = load(setup.hot_load_k, 4, "hot");
    cal.cold = load(setup.base_temperature_k, 5, "cold");
    return cal;
}

std::vector<RawSpectrum> simulate_scan(const SimulationSetup& setup,
                                       std::span<const TuningStep> steps, int pass) {
    std::vector<RawSpectrum> out(steps.size());
    const auto n = static_cast<long long>(steps.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long long k = 0; k < n; ++k) {
        try {
            const TuningStep& step = steps[static_cast<std::size_t>(k)];
            const std::uint64_t seed = derive_seed(step.seed, {static_cast<std::uint64_t>(pass)});
            ReceiverParams rx = step_receiver(setup, step);
            const Anomaly anomaly = setup.anomalies.draw(seed);
            double true_nu_c = step.nu_c;
            double drift = 0.0;
            double probe_db = 0.0;
            switch (anomaly) {
                case Anomaly::drift:
                    drift = setup.anomalies.drift_hz;
                    true_nu_c += 0.5 * drift;  // mean position over the acquisition
                    break;
                case Anomaly::gain_sag:
                    if (setup.squeezing) rx.G_s = setup.anomalies.sag_G_s;
                    break;
                case Anomaly::probe_power:
                    probe_db = setup.anomalies.probe_offset_db;
                    rx.G_A_db += probe_db;
                    break;
                case Anomaly::none:
                    break;
            }
            ReceiverParams actual = rx;
            actual.nu_c = true_nu_c;

            const double nu_start = band_start(step.nu_c, setup.acquisition);
            std::vector<AxionHypothesis> local;
            for (const auto& h : setup.injections) {
                if (touches_band(h, setup.lineshape, nu_start, setup.acquisition)) local.push_back(h);
            }
            RawSpectrum s =
                setup.literal_segments > 0
                    ? simulate_spectrum_literal(step, actual, local, setup.lineshape, setup.baseline,
                                                setup.acquisition, setup.literal_segments, seed)
                    : simulate_spectrum(step, actual, local, setup.lineshape, setup.baseline,
                                        setup.acquisition, seed);
            s.meta.nu_c = step.nu_c;
            s.meta.drift_hz = drift;
            s.meta.probe_power_db = probe_db;
            s.meta.anomaly = static_cast<int>(anomaly);
            s.meta.pass = pass;
            s.meta.acquisition_time_s = static_cast<double>(step.step_id) * setup.acquisition.tau_s;
            out[static_cast<std::size_t>(k)] = std::move(s);
        } catch (...) {
#pragma omp critical(haloscan_scan_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<CalibrationSet> simulate_calibrations(const SimulationSetup& setup,
                                                  const TuningPlan& plan) {
    if (setup.calibration_interval < 1) throw DomainError("calibration interval must be >= 1");
    std::vector<TuningStep> chosen;
    for (std::size_t k = 0; k < plan.steps.size(); k += static_cast<std::size_t>(setup.calibration_interval)) {
        chosen.push_back(plan.steps[k]);
    }
    std::vector<CalibrationSet> out(chosen.size());
    const auto n = static_cast<long long>(chosen.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long long k = 0; k < n; ++k) {
        try {
            const TuningStep& step = chosen[static_cast<std::size_t>(k)];
            out[static_cast<std::size_t>(k)] =
                simulate_calibration(step, setup, derive_seed(step.seed, {kCalibrationStream}));
        } catch (...) {
#pragma omp critical(haloscan_scan_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace haloscan
