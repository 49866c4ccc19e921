#include "haloscan/calibration.hpp"

#include "haloscan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace haloscan {
namespace {

struct WeightedMean {
    double sum_wx = 0.0;
    double sum_w = 0.0;

    void add(double x, double var) {
        if (!(var > 0) || !std::isfinite(x) || !std::isfinite(var)) return;
        sum_wx += x / var;
        sum_w += 1.0 / var;
    }
    double mean() const { return sum_wx / sum_w; }
    double sigma() const { return 1.0 / std::sqrt(sum_w); }
    bool empty() const { return sum_w <= 0; }
};

void require_same_grid(const RawSpectrum& a, const RawSpectrum& b, const char* who) {
    if (a.psd.size() != b.psd.size() || a.nu_start != b.nu_start || a.bin_width != b.bin_width) {
        throw DomainError(std::string(who) + ": spectra do not share a bin grid");
    }
    if (a.psd.empty()) throw DomainError(std::string(who) + ": empty spectra");
}

double centre(const RawSpectrum& s, std::size_t j) {
    return s.nu_start + (static_cast<double>(j) + 0.5) * s.bin_width;
}

// Variance of the ratio of two independent averaged PSD bins, relative to r^2.
double ratio_rel_var(const RawSpectrum& a, const RawSpectrum& b) {
    return 1.0 / static_cast<double>(a.n_averages) + 1.0 / static_cast<double>(b.n_averages);
}

CavityNoiseEstimate solve_cavity_noise(const RawSpectrum& meas1, const RawSpectrum& meas3,
                                       const CavityGeometry& g, double N_A) {
    const double offset = meas1.meta.cavity_offset_hz;
    const double rel = ratio_rel_var(meas1, meas3);
    WeightedMean acc;
    for (std::size_t j = 0; j < meas3.psd.size(); ++j) {
        const double d = centre(meas3, j) - g.nu_c;
        const double a3 = cavity_absorption(d, g.kappa_l, g.beta);
        const double a1 = cavity_absorption(d - offset, g.kappa_l, g.beta);
        const double r = meas3.psd[j] / meas1.psd[j];
        const double d1 = g.N_f * (1.0 - a1) + N_A;
        const double d3 = g.N_f * (1.0 - a3) + N_A;
        const double den = a3 - r * a1;
        if (den <= 0) continue;
        const double value = (r * d1 - d3) / den;
        const double slope = (d1 * a3 - a1 * d3) / (den * den);
        acc.add(value, slope * slope * r * r * rel);
    }
    if (acc.empty()) throw NumericError("infer_cavity_noise: no bin constrains N_c0");
    CavityNoiseEstimate out;
    out.N_c0 = acc.mean();
    out.sigma = acc.sigma();
    return out;
}

SqueezingEstimate solve_squeezing(const RawSpectrum& meas2, const RawSpectrum& meas3,
                                  const CavityGeometry& g, double N_A, double N_c0) {
    const double rel = ratio_rel_var(meas2, meas3);
    WeightedMean acc;
    SqueezingEstimate out;
    out.S_per_bin.resize(meas3.psd.size());
    bool any_below_one = false;
    for (std::size_t j = 0; j < meas3.psd.size(); ++j) {
        const double a = cavity_absorption(centre(meas3, j) - g.nu_c, g.kappa_l, g.beta);
        const double r = meas2.psd[j] / meas3.psd[j];
        any_below_one = any_below_one || r < 1.0;
        const double reflected = g.N_f * (1.0 - a);
        const double unsqueezed = N_c0 * a + reflected + N_A;
        const double s = (r * unsqueezed - N_c0 * a - N_A) / reflected;
        const double slope = unsqueezed / reflected;
        out.S_per_bin[j] = s;
        acc.add(s, slope * slope * r * r * rel);
    }
    if (acc.empty()) throw NumericError("infer_squeezing: no usable bins");
    out.S = acc.mean();
    out.S_sigma = acc.sigma();
    out.squeezing_detected = any_below_one;
    return out;
}

}  // namespace

AddedNoiseEstimate infer_added_noise(const RawSpectrum& hot, const RawSpectrum& cold, double T_hot,
                                     double T_cold) {
    require_same_grid(hot, cold, "infer_added_noise");
    if (T_hot == T_cold) {
        throw DomainError("infer_added_noise: loads at equal temperature give a degenerate system");
    }
    double sum_hot = 0.0;
    double sum_cold = 0.0;
    for (std::size_t j = 0; j < hot.psd.size(); ++j) {
        sum_hot += hot.psd[j];
        sum_cold += cold.psd[j];
    }
    if ((sum_hot - sum_cold) * (T_hot - T_cold) <= 0) {
        throw DomainError(
            "infer_added_noise: hot load spectrum is not above the cold one; the loads are "
            "likely mislabelled");
    }
    const double rel = ratio_rel_var(hot, cold);
    AddedNoiseEstimate out;
    out.N_A_per_bin.resize(hot.psd.size());
    out.gain_per_bin.resize(hot.psd.size());
    WeightedMean na;
    WeightedMean gain;
    for (std::size_t j = 0; j < hot.psd.size(); ++j) {
        const double nu = centre(hot, j);
        const double nh = thermal_quanta(nu, T_hot);
        const double nc = thermal_quanta(nu, T_cold);
        const double y = hot.psd[j] / cold.psd[j];
        const double value = (nh - y * nc) / (y - 1.0);
        const double slope = (nc - nh) / ((y - 1.0) * (y - 1.0));
        out.N_A_per_bin[j] = value;
        na.add(value, slope * slope * y * y * rel);
        const double gj = (hot.psd[j] - cold.psd[j]) / (nh - nc);
        out.gain_per_bin[j] = gj;
        // Var(P_h - P_c) / (nh - nc)^2 with each P carrying 1/n relative variance.
        const double var = (hot.psd[j] * hot.psd[j] / hot.n_averages +
                            cold.psd[j] * cold.psd[j] / cold.n_averages) /
                           ((nh - nc) * (nh - nc));
        gain.add(gj, var);
    }
    out.N_A = na.mean();
    out.N_A_sigma = na.sigma();
    out.gain_db = 10.0 * std::log10(gain.mean());
    out.gain_sigma_db = 10.0 / std::log(10.0) * gain.sigma() / gain.mean();
    return out;
}

CavityNoiseEstimate infer_cavity_noise(const RawSpectrum& meas1, const RawSpectrum& meas3,
                                       const CavityGeometry& geometry) {
    require_same_grid(meas1, meas3, "infer_cavity_noise");
    CavityNoiseEstimate out = solve_cavity_noise(meas1, meas3, geometry, geometry.N_A);
    out.physical = out.N_c0 >= 0.25;
    return out;
}

SqueezingEstimate infer_squeezing(const RawSpectrum& meas2, const RawSpectrum& meas3, double eta,
                                  const CavityGeometry& geometry) {
    require_same_grid(meas2, meas3, "infer_squeezing");
    if (!(eta > 0 && eta <= 1)) throw DomainError("infer_squeezing: eta must lie in (0, 1]");
    SqueezingEstimate out = solve_squeezing(meas2, meas3, geometry, geometry.N_A, geometry.N_c0);
    out.G_s = (out.S - (1.0 - eta)) / eta;
    out.G_s_sigma = out.S_sigma / eta;
    return out;
}

ReceiverParams CalibrationResult::receiver() const {
    ReceiverParams rx;
    rx.nu_c = nu_c;
    rx.kappa_l = kappa_l;
    rx.beta = beta;
    rx.N_c0 = std::max(N_c0_hat, 0.25);
    rx.N_f = N_f;
    rx.eta = 1.0;  // S_hat already includes the transmission loss
    rx.G_s = std::max(S_hat, 0.0);
    rx.N_A = std::max(N_A_hat, 0.0);
    rx.G_A_db = gain_hat_db;
    return rx;
}

CalibrationResult calibrate(const CalibrationSet& set, double eta) {
    const AddedNoiseEstimate added = infer_added_noise(set.hot, set.cold, set.T_hot, set.T_cold);

    CavityGeometry g;
    g.nu_c = set.meas3.meta.nu_c;
    g.beta = set.meas3.meta.beta;
    if (!(set.meas3.meta.Q_L > 0 && g.beta > 0)) {
        throw DomainError("calibrate: meas3 metadata lacks Q_L or beta");
    }
    g.kappa_l = g.nu_c / set.meas3.meta.Q_L / (1.0 + g.beta);
    g.N_f = thermal_quanta(g.nu_c, set.T_cold);
    g.N_A = added.N_A;

    CavityNoiseEstimate cav = infer_cavity_noise(set.meas1, set.meas3, g);
    // Fold the N_A uncertainty into N_c0 by finite difference.
    {
        const double hi = solve_cavity_noise(set.meas1, set.meas3, g, added.N_A + added.N_A_sigma).N_c0;
        const double lo = solve_cavity_noise(set.meas1, set.meas3, g, added.N_A - added.N_A_sigma).N_c0;
        cav.sigma = std::hypot(cav.sigma, 0.5 * (hi - lo));
    }
    g.N_c0 = cav.N_c0;
    SqueezingEstimate sq = infer_squeezing(set.meas2, set.meas3, eta, g);
    {
        CavityGeometry gh = g;
        gh.N_c0 = cav.N_c0 + cav.sigma;
        CavityGeometry gl = g;
        gl.N_c0 = cav.N_c0 - cav.sigma;
        const double dS = 0.5 * (infer_squeezing(set.meas2, set.meas3, eta, gh).S -
                                 infer_squeezing(set.meas2, set.meas3, eta, gl).S);
        sq.S_sigma = std::hypot(sq.S_sigma, dS);
        sq.G_s_sigma = sq.S_sigma / eta;
    }

    CalibrationResult r;
    r.step_id = set.step_id;
    r.nu_c = g.nu_c;
    r.beta = g.beta;
    r.kappa_l = g.kappa_l;
    r.N_f = g.N_f;
    r.eta = eta;
    r.G_s_hat = sq.G_s;
    r.G_s_sigma = sq.G_s_sigma;
    r.S_hat = sq.S;
    r.S_sigma = sq.S_sigma;
    r.N_c0_hat = cav.N_c0;
    r.N_c0_sigma = cav.sigma;
    r.N_A_hat = added.N_A;
    r.N_A_sigma = added.N_A_sigma;
    r.gain_hat_db = added.gain_db;
    r.gain_sigma_db = added.gain_sigma_db;
    r.squeezing_detected = sq.squeezing_detected;
    r.cavity_noise_physical = cav.physical;
    return r;
}

const CalibrationResult& nearest_calibration(const std::vector<CalibrationResult>& results,
                                             int step_id) {
    if (results.empty()) throw DomainError("nearest_calibration: no calibrations available");
    const CalibrationResult* best = &results.front();
    for (const auto& r : results) {
        const int d = std::abs(r.step_id - step_id);
        const int bd = std::abs(best->step_id - step_id);
        if (d < bd || (d == bd && r.step_id < best->step_id)) best = &r;
    }
    return *best;
}

}  // namespace haloscan
