#pragma once

// Noise budget of a squeezed-state receiver coupled to a single-port cavity.
//
// Conventions: all linewidths (kappa) and detunings are ordinary-frequency Hz,
// with kappa the full width at half maximum. Noise is in quanta per quadrature
// (vacuum = 1/4). The signal and the cavity-internal noise leave the cavity
// through the same absorption profile 1 - |Gamma|^2, so their ratio does not
// depend on detuning.

#include <span>
#include <vector>

namespace haloscan {

struct ReceiverParams {
    double nu_c = 4.14e9;       // cavity resonance, Hz
    double kappa_l = 88.0e3;    // internal loss linewidth, Hz
    double beta = 7.1;          // kappa_m / kappa_l
    double N_c0 = 0.41;         // cavity-internal noise before filtering, quanta
    double N_f = 0.27;          // input-line thermal noise, quanta
    double eta = 0.63;          // SQ -> AMP transmissivity
    double G_s = 0.047619047619047616;  // squeezer output variance ratio (S = 0.40 at eta = 0.63)
    double N_A = 0.03;          // added noise referred to AMP input, quanta
    double G_A_db = 28.0;       // AMP gain, bookkeeping only

    double kappa_m() const { return beta * kappa_l; }
    double loaded_linewidth() const { return kappa_l * (1.0 + beta); }
    double loaded_q() const { return nu_c / loaded_linewidth(); }
    double squeezing() const;

    // Throws DomainError naming the violated invariant.
    void validate() const;
};

// (1/4) coth(h nu / 2 k_B T); exactly 1/4 at T = 0.
double thermal_quanta(double nu_hz, double temperature_k);

// S = eta G_s + (1 - eta)
double delivered_squeezing(double eta, double G_s);

// |Gamma(delta)|^2 for a single measurement port with kappa_m = beta kappa_l.
double cavity_reflectance(double delta_hz, double kappa_l, double beta);

// 1 - |Gamma|^2 = [4 beta / (1 + beta)^2] L(delta), evaluated in that form.
double cavity_absorption(double delta_hz, double kappa_l, double beta);

struct NoiseBudget {
    std::vector<double> detunings;
    std::vector<double> N_c;
    std::vector<double> N_r;
    std::vector<double> N_A;
    std::vector<double> S_ax;
    std::vector<double> total;
    std::vector<double> alpha;
};

// signal_peak is the on-resonance signal density for a perfectly absorbing
// cavity (g^2 A_ref, see axion_model); pass 0 for a signal-free budget.
NoiseBudget noise_budget(const ReceiverParams& params, std::span<const double> detunings,
                         double signal_peak = 0.0);

double total_noise(const ReceiverParams& params, double delta_hz);

// alpha(delta) = S_ax / (N_c + N_r + N_A)
double visibility(const ReceiverParams& params, double signal_peak, double delta_hz);

struct ScanRateOptions {
    double window_linewidths = 20.0;   // integrate over +/- this many loaded linewidths
    double relative_tolerance = 1e-12;
    double absolute_tolerance = 1e-10; // in units of alpha(0)^2 * loaded linewidth
};

// R = integral of alpha^2 over detuning. Throws NumericError if the adaptive
// quadrature misses its tolerance.
double scan_rate(const ReceiverParams& params, double signal_peak,
                 const ScanRateOptions& options = {});

struct CouplingOptimum {
    double beta = 0.0;
    double rate = 0.0;
    bool at_boundary = false;  // maximum sits on the edge of the search interval
};

struct CouplingSearch {
    double beta_min = 0.1;
    double beta_max = 100.0;
    int grid_points = 64;
    double relative_tolerance = 1e-6;
};

// Maximises scan_rate over beta for the given noise inputs. kappa_l and the
// signal scale cancel out of the argmax and are fixed internally.
CouplingOptimum optimize_coupling(double S, double N_c0, double N_f, double N_A,
                                  const CouplingSearch& search = {});

// Normalised measured variance vs. pump phase: S sin^2 + G_anti cos^2.
double variance_vs_phase(double theta, double S, double G_anti);

// Golden-section maximisation of a unimodal function on [lo, hi].
template <class F>
double golden_section_maximize(F&& f, double lo, double hi, double tol, int max_iter = 200);

}  // namespace haloscan

#include <cmath>

template <class F>
double haloscan::golden_section_maximize(F&& f, double lo, double hi, double tol, int max_iter) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iter && (hi - lo) > tol; ++it) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    return 0.5 * (lo + hi);
}
