#include "haloscan/receiver_model.hpp"

#include "haloscan/constants.hpp"
#include "haloscan/errors.hpp"
#include "haloscan/simd/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>
#include <string>

namespace haloscan {
namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

double absorption_peak(double beta) { return 4.0 * beta / ((1.0 + beta) * (1.0 + beta)); }

}  // namespace

double ReceiverParams::squeezing() const { return delivered_squeezing(eta, G_s); }

void ReceiverParams::validate() const {
    require(std::isfinite(nu_c) && nu_c > 0, "receiver: nu_c must be positive");
    require(std::isfinite(kappa_l) && kappa_l > 0, "receiver: kappa_l must be positive");
    require(std::isfinite(beta) && beta > 0, "receiver: beta must be positive");
    require(eta > 0 && eta <= 1, "receiver: eta must lie in (0, 1]");
    require(std::isfinite(G_s) && G_s >= 0, "receiver: G_s must be non-negative");
    require(N_c0 >= constants::vacuum_quanta, "receiver: N_c0 below the vacuum floor 0.25");
    require(N_f >= constants::vacuum_quanta, "receiver: N_f below the vacuum floor 0.25");
    require(std::isfinite(N_A) && N_A >= 0, "receiver: N_A must be non-negative");
}

double thermal_quanta(double nu_hz, double temperature_k) {
    if (!std::isfinite(nu_hz) || !std::isfinite(temperature_k)) {
        throw DomainError("thermal_quanta: non-finite input");
    }
    require(nu_hz > 0, "thermal_quanta: frequency must be positive");
    require(temperature_k >= 0, "thermal_quanta: temperature must be non-negative");
    if (temperature_k == 0.0) return constants::vacuum_quanta;
    const double x = constants::planck * nu_hz / (2.0 * constants::boltzmann * temperature_k);
    return constants::vacuum_quanta / std::tanh(x);
}

double delivered_squeezing(double eta, double G_s) {
    if (!(eta > 0 && eta <= 1)) throw DomainError("delivered_squeezing: eta must lie in (0, 1]");
    require(std::isfinite(G_s) && G_s >= 0, "delivered_squeezing: G_s must be non-negative");
    return eta * G_s + (1.0 - eta);
}

double cavity_reflectance(double delta_hz, double kappa_l, double beta) {
    require(kappa_l > 0 && beta > 0, "cavity_reflectance: kappa_l and beta must be positive");
    if (std::isinf(delta_hz)) return 1.0;
    const double km = beta * kappa_l;
    const double d2 = 4.0 * delta_hz * delta_hz;
    return ((km - kappa_l) * (km - kappa_l) + d2) / ((km + kappa_l) * (km + kappa_l) + d2);
}

double cavity_absorption(double delta_hz, double kappa_l, double beta) {
    require(kappa_l > 0 && beta > 0, "cavity_absorption: kappa_l and beta must be positive");
    if (std::isinf(delta_hz)) return 0.0;
    const double hw = 0.5 * kappa_l * (1.0 + beta);
    return absorption_peak(beta) * hw * hw / (hw * hw + delta_hz * delta_hz);
}

double total_noise(const ReceiverParams& p, double delta_hz) {
    const double a = cavity_absorption(delta_hz, p.kappa_l, p.beta);
    return p.N_c0 * a + p.squeezing() * p.N_f * (1.0 - a) + p.N_A;
}

NoiseBudget noise_budget(const ReceiverParams& p, std::span<const double> detunings,
                         double signal_peak) {
    p.validate();
    for (double d : detunings) {
        if (!std::isfinite(d)) throw DomainError("noise_budget: non-finite detuning");
    }
    const std::size_t n = detunings.size();
    NoiseBudget b;
    b.detunings.assign(detunings.begin(), detunings.end());
    std::vector<double> absorption(n);
    simd::kernels().lorentzian(detunings, 0.5 * p.loaded_linewidth(), absorption_peak(p.beta),
                               absorption);
    const double S = p.squeezing();
    b.N_c.resize(n);
    b.N_r.resize(n);
    b.N_A.assign(n, p.N_A);
    b.S_ax.resize(n);
    b.total.resize(n);
    b.alpha.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        b.N_c[i] = p.N_c0 * absorption[i];
        b.N_r[i] = S * p.N_f * (1.0 - absorption[i]);
        b.S_ax[i] = signal_peak * absorption[i];
        b.total[i] = b.N_c[i] + b.N_r[i] + b.N_A[i];
        b.alpha[i] = b.S_ax[i] / b.total[i];
    }
    return b;
}

double visibility(const ReceiverParams& p, double signal_peak, double delta_hz) {
    return signal_peak * cavity_absorption(delta_hz, p.kappa_l, p.beta) / total_noise(p, delta_hz);
}

double scan_rate(const ReceiverParams& p, double signal_peak, const ScanRateOptions& opt) {
    p.validate();
    const double kappa = p.loaded_linewidth();
    const double window = opt.window_linewidths * kappa;
    auto alpha2 = [&](double d) {
        const double a = visibility(p, signal_peak, d);
        return a * a;
    };
    double err = 0.0;
    // The integrand is even in detuning.
    const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        alpha2, 0.0, window, 20, opt.relative_tolerance, &err);
    const double scale = alpha2(0.0) * kappa;
    const double limit = std::max(opt.absolute_tolerance * scale, opt.relative_tolerance * half);
    if (!std::isfinite(half) || err > 10.0 * limit) {
        std::ostringstream msg;
        msg << "scan_rate: quadrature did not converge (integral=" << half
            << ", error estimate=" << err << ", tolerance=" << limit << ", beta=" << p.beta
            << ")";
        throw NumericError(msg.str());
    }
    return 2.0 * half;
}

CouplingOptimum optimize_coupling(double S, double N_c0, double N_f, double N_A,
                                  const CouplingSearch& search) {
    require(S > 0, "optimize_coupling: S must be positive");
    require(N_c0 >= constants::vacuum_quanta && N_f >= constants::vacuum_quanta,
            "optimize_coupling: noise below vacuum floor");
    require(N_A >= 0, "optimize_coupling: N_A must be non-negative");
    require(search.beta_min > 0 && search.beta_max > search.beta_min && search.grid_points >= 3,
            "optimize_coupling: bad search interval");

    ReceiverParams p;
    p.nu_c = 1.0e9;
    p.kappa_l = 1.0;
    p.N_c0 = N_c0;
    p.N_f = N_f;
    p.N_A = N_A;
    // Express S through eta = 1, G_s = S so the rest of the model is untouched.
    p.eta = 1.0;
    p.G_s = S;

    auto rate = [&](double log_beta) {
        ReceiverParams q = p;
        q.beta = std::exp(log_beta);
        return scan_rate(q, 1.0);
    };

    // Coarse log-spaced pre-scan guards the golden section against a
    // non-unimodal objective.
    const double lo = std::log(search.beta_min);
    const double hi = std::log(search.beta_max);
    const int n = search.grid_points;
    int best = 0;
    double best_rate = -1.0;
    for (int k = 0; k < n; ++k) {
        const double r = rate(lo + (hi - lo) * k / (n - 1));
        if (r > best_rate) {
            best_rate = r;
            best = k;
        }
    }
    CouplingOptimum out;
    if (best == 0 || best == n - 1) {
        out.beta = std::exp(best == 0 ? lo : hi);
        out.rate = best_rate;
        out.at_boundary = true;
        return out;
    }
    const double a = lo + (hi - lo) * (best - 1) / (n - 1);
    const double b = lo + (hi - lo) * (best + 1) / (n - 1);
    const double x = golden_section_maximize(rate, a, b, search.relative_tolerance);
    out.beta = std::exp(x);
    out.rate = rate(x);
    return out;
}

double variance_vs_phase(double theta, double S, double G_anti) {
    require(S <= 1.0 && G_anti >= 1.0, "variance_vs_phase: requires S <= 1 <= G_anti");
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return S * s * s + G_anti * c * c;
}

}  // namespace haloscan
