#include "haloscan/axion_model.hpp"
#include "haloscan/errors.hpp"

#include <doctest.h>

#include <numeric>

using namespace haloscan;

TEST_SUITE("axion_model") {

TEST_CASE("lineshape is a normalised one-sided density") {
    const LineshapeParams ls;
    const double nu_a = 4.14e9;
    CHECK(lineshape(nu_a - 1.0, nu_a, ls) == 0.0);
    // trapezoid on a fine grid, independent of the library's own integration
    const double h = 0.5;
    double sum = 0.0;
    for (double f = 0.0; f < 2.0e5; f += h) {
        sum += 0.5 * h * (lineshape(nu_a + f, nu_a, ls) + lineshape(nu_a + f + h, nu_a, ls));
    }
    // the density rises like sqrt(f) from zero, which limits the trapezoid
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(lineshape_cdf(2.0e5, nu_a, ls) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lineshape_cdf(1500.0, nu_a, ls) > 0.3);
}

TEST_CASE("95% of the power lies within a few kHz") {
    const LineshapeParams ls;
    const double nu_a = 4.14e9;
    CHECK(lineshape_cdf(4400.0, nu_a, ls) >= 0.95);
    CHECK(lineshape_cdf(2000.0, nu_a, ls) < 0.95);
}

TEST_CASE("kernel bins sum to one and follow the cdf") {
    const LineshapeParams ls;
    const double nu_a = 4.14e9;
    const auto k = lineshape_kernel(nu_a, ls);
    REQUIRE(k.size() == static_cast<std::size_t>(ls.span_bins));
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0));
    const double c = lineshape_cdf(100.0, nu_a, ls) / lineshape_cdf(512 * 100.0, nu_a, ls);
    CHECK(k[0] == doctest::Approx(c).epsilon(1e-9));

    // an axion 30 Hz into its first bin moves power earlier
    const auto off = lineshape_kernel(nu_a, ls, 30.0);
    CHECK(std::accumulate(off.begin(), off.end(), 0.0) == doctest::Approx(1.0));
    CHECK(off[0] < k[0]);
}

TEST_CASE("signal scales with g squared") {
    AxionHypothesis h;
    h.g = 2.0;
    const LineshapeParams ls;
    CHECK(signal_peak(h, ls) == doctest::Approx(4.0 * signal_peak_per_g2(h, ls)));
    ReceiverParams r;
    r.nu_c = h.nu_a;
    const double on = signal_psd(0.0, h, r, ls);
    CHECK(on == doctest::Approx(signal_peak(h, ls) * (1.0 - cavity_reflectance(0.0, r.kappa_l, r.beta))));
}

TEST_CASE("signal spectrum places the lineshape at nu_a") {
    AxionHypothesis h;
    const LineshapeParams ls;
    ReceiverParams r;
    r.nu_c = h.nu_a;
    const double start = h.nu_a - 1000.0 * ls.bin_width;
    const auto s = signal_spectrum(h, r, ls, start, 3000);
    for (std::size_t j = 0; j < 1000; ++j) CHECK(s[j] == 0.0);
    CHECK(s[1000] > 0.0);
}

TEST_CASE("bad hypotheses are rejected") {
    AxionHypothesis h;
    h.g = -1.0;
    CHECK_THROWS_AS(h.validate(), DomainError);
    LineshapeParams ls;
    ls.span_bins = 0;
    CHECK_THROWS_AS(ls.validate(), DomainError);
}

}
