#include "haloscan/calibration.hpp"
#include "haloscan/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace haloscan;

namespace {

SimulationSetup cal_setup(double G_s) {
    SimulationSetup s;
    s.receiver.G_s = G_s;
    s.baseline = BaselineModel::flat();
    return s;
}

CalibrationSet one_set(const SimulationSetup& setup, std::uint64_t seed) {
    const TuningStep step{0, 4.14e9, 7.1, seed};
    return simulate_calibration(step, setup, seed);
}

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("closure on the operating point") {
    const SimulationSetup setup = cal_setup(0.047619047619047616);
    const CalibrationResult r = calibrate(one_set(setup, 1), 0.63);
    CHECK(r.N_A_hat == doctest::Approx(0.03).epsilon(0.1));
    CHECK(r.N_c0_hat == doctest::Approx(0.41).epsilon(0.01));
    CHECK(r.S_hat == doctest::Approx(0.40).epsilon(0.01));
    CHECK(-10.0 * std::log10(r.S_hat) == doctest::Approx(4.0).epsilon(0.05));
    CHECK(r.gain_hat_db == doctest::Approx(28.0).epsilon(1e-3));
    CHECK(r.N_f == doctest::Approx(0.270).epsilon(0.01));
    CHECK(r.squeezing_detected);
    CHECK(r.cavity_noise_physical);
    CHECK(r.kappa_l == doctest::Approx(4.14e9 / 47000.0).epsilon(1e-9));
}

TEST_CASE("G_s closure") {
    const SimulationSetup setup = cal_setup(0.10);
    const CalibrationResult r = calibrate(one_set(setup, 2), 0.63);
    CHECK(r.G_s_hat == doctest::Approx(0.10).epsilon(0.2));
    CHECK(r.G_s_sigma > 0.0);
    CHECK(r.G_s_sigma < 0.02);
}

TEST_CASE("no squeezing reads back S = 1") {
    SimulationSetup setup = cal_setup(1.0);
    CalibrationSet set = one_set(setup, 3);
    set.meas2 = set.meas3;
    CavityGeometry g{4.14e9, 4.14e9 / 47000.0, 7.1, 0.27, 0.03, 0.41};
    const SqueezingEstimate s = infer_squeezing(set.meas2, set.meas3, 0.63, g);
    CHECK(s.S == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.G_s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hot/cold problems are reported") {
    const SimulationSetup setup = cal_setup(0.047619047619047616);
    const CalibrationSet set = one_set(setup, 4);
    CHECK_THROWS_AS(infer_added_noise(set.hot, set.cold, 0.1, 0.1), DomainError);
    // swapped loads look like a hot load colder than the cold one
    CHECK_THROWS_AS(infer_added_noise(set.cold, set.hot, set.T_hot, set.T_cold), DomainError);
    const AddedNoiseEstimate a = infer_added_noise(set.hot, set.cold, set.T_hot, set.T_cold);
    CHECK(a.N_A == doctest::Approx(0.03).epsilon(0.1));
    CHECK(a.N_A_per_bin.size() == set.hot.psd.size());
}

TEST_CASE("cavity noise below vacuum is flagged") {
    const SimulationSetup setup = cal_setup(1.0);
    CalibrationSet set = one_set(setup, 5);
    // pretend the on-resonance power dropped: the solve lands below 1/4
    for (double& v : set.meas3.psd) v *= 0.75;
    CavityGeometry g{4.14e9, 4.14e9 / 47000.0, 7.1, 0.27, 0.03, 0.0};
    const CavityNoiseEstimate c = infer_cavity_noise(set.meas1, set.meas3, g);
    CHECK(c.N_c0 < 0.25);
    CHECK_FALSE(c.physical);
}

TEST_CASE("calibrated receiver and nearest lookup") {
    CalibrationResult a;
    a.step_id = 0;
    a.nu_c = 4.14e9;
    a.beta = 7.1;
    a.kappa_l = 88e3;
    a.N_f = 0.27;
    a.S_hat = 0.4;
    a.N_c0_hat = 0.2;  // unphysical; the receiver clamps to vacuum
    a.N_A_hat = 0.03;
    const ReceiverParams rx = a.receiver();
    CHECK(rx.squeezing() == doctest::Approx(0.4));
    CHECK(rx.N_c0 == 0.25);

    CalibrationResult b = a;
    b.step_id = 10;
    const std::vector<CalibrationResult> all{a, b};
    CHECK(nearest_calibration(all, 3).step_id == 0);
    CHECK(nearest_calibration(all, 5).step_id == 0);
    CHECK(nearest_calibration(all, 6).step_id == 10);
    CHECK(nearest_calibration(all, 40).step_id == 10);
}

}
