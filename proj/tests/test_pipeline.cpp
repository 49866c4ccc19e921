#include "haloscan/errors.hpp"
#include "haloscan/pipeline.hpp"
#include "support/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace haloscan;

namespace {

RawSpectrum raw(int step, std::size_t n, double level, std::uint64_t seed, double sigma = 1.0 / 600.0) {
    RawSpectrum s;
    s.step_id = step;
    s.nu_start = 4.14e9 + step * 850e3;
    s.n_averages = 360000;
    s.meta.nu_c = s.nu_start + n / 2 * 100.0;
    s.meta.beta = 7.1;
    s.meta.Q_L = 47000.0 / 8.1;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> eps(0.0, sigma);
    for (std::size_t j = 0; j < n; ++j) {
        const double shape = 1.0 + 0.1 * std::cos(2.0 * M_PI * j / 7000.0);
        s.psd.push_back(level * shape * (1.0 + eps(rng)));
    }
    return s;
}

CalibrationResult calibration(int step) {
    CalibrationResult c;
    c.step_id = step;
    c.S_hat = 0.4;
    c.N_c0_hat = 0.41;
    c.N_f = 0.27;
    c.N_A_hat = 0.03;
    return c;
}

ProcessedSpectrum processed(int step, double nu_start, std::vector<double> excess, double sigma) {
    ProcessedSpectrum p;
    p.step_id = step;
    p.nu_start = nu_start;
    p.nu_c = nu_start + 0.5 * excess.size() * 100.0;
    p.beta = 7.1;
    p.Q_L = 47000.0 / 8.1;
    p.excess = std::move(excess);
    p.sigma = sigma;
    return p;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("cuts report the first failing rule") {
    std::vector<RawSpectrum> in(4);
    for (int k = 0; k < 4; ++k) {
        in[k].step_id = k;
        in[k].meta.squeezing_db = 4.0;
    }
    in[1].meta.drift_hz = 200e3;
    in[1].meta.squeezing_db = 0.5;  // also fails squeezing; drift wins
    in[2].meta.squeezing_db = 0.4;
    in[3].meta.probe_power_db = -3.0;
    const CutResult r = apply_cuts(in, CutCriteria{});
    REQUIRE(r.kept.size() == 1);
    CHECK(r.kept[0].step_id == 0);
    REQUIRE(r.log.entries.size() == 3);
    CHECK(r.log.entries[0].reason == "drift");
    CHECK(r.log.entries[1].reason == "squeezing");
    CHECK(r.log.entries[2].reason == "probe_power");
    CHECK(r.log.n_input == 4);

    CutCriteria unsqueezed;
    unsqueezed.squeezing_expected = false;
    CHECK(apply_cuts(in, unsqueezed).kept.size() == 2);
}

TEST_CASE("nothing cut, nothing lost") {
    std::vector<RawSpectrum> in(3);
    for (auto& s : in) s.meta.squeezing_db = 4.0;
    const CutResult r = apply_cuts(in, CutCriteria{});
    CHECK(r.kept.size() == 3);
    CHECK(r.log.entries.empty());
}

TEST_CASE("filter settings are checked against the band") {
    FilterSettings f;
    CHECK_NOTHROW(f.validate(100.0, 30000));
    CHECK_THROWS_AS(f.validate(100.0, 500), DomainError);
    f.rf_order = 2000;
    CHECK_THROWS_AS(f.validate(100.0, 30000), DomainError);
}

TEST_CASE("structure removal gives unit-mean, radiometer-limited excess") {
    std::vector<RawSpectrum> in;
    for (int k = 0; k < 8; ++k) in.push_back(raw(k, 4000, 5e-3 * (1 + k), 10 + k));
    const StructureRemoval sr = remove_structure(in, FilterSettings{});
    REQUIRE(sr.spectra.size() == 8);
    CHECK(sr.if_baseline.n_spectra == 8);
    for (const auto& p : sr.spectra) {
        CHECK(std::isnan(p.excess.front()));
        CHECK(std::isnan(p.excess.back()));
        CHECK(p.sigma == doctest::Approx(1.0 / 600.0).epsilon(0.08));
    }
}

TEST_CASE("overall gain drops out") {
    std::vector<RawSpectrum> a, b;
    for (int k = 0; k < 4; ++k) {
        a.push_back(raw(k, 4000, 1.0, 20 + k));
        b.push_back(a.back());
        for (double& v : b.back().psd) v *= 630.957;
    }
    const auto ra = remove_structure(a, FilterSettings{});
    const auto rb = remove_structure(b, FilterSettings{});
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t j = 0; j < 4000; ++j) {
            const double x = ra.spectra[k].excess[j];
            if (std::isnan(x)) continue;
            CHECK(std::abs(x - rb.spectra[k].excess[j]) < 1e-9);
        }
    }
}

TEST_CASE("single spectrum combines to excess over expected signal") {
    const std::vector<CalibrationResult> cals{calibration(0)};
    std::vector<double> e(3000);
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = 1e-3 * std::sin(0.1 * j);
    e[0] = std::nan("");
    const ProcessedSpectrum p = processed(0, 4.14e9, e, 2e-3);
    const auto v = expected_signal(p, cals[0], 2.0, LineshapeParams{});
    const CombinedSpectrum c = combine_spectra(std::span(&p, 1), cals, 2.0, LineshapeParams{});
    CHECK(std::isnan(c.y[0]));
    CHECK(c.n_contrib[0] == 0);
    for (std::size_t j = 1; j < e.size(); ++j) {
        CHECK(c.y[j] == doctest::Approx(e[j] / v[j]).epsilon(1e-12));
        CHECK(c.var[j] == doctest::Approx(4e-6 / (v[j] * v[j])).epsilon(1e-12));
    }
}

TEST_CASE("inverse-variance weights") {
    const std::vector<CalibrationResult> cals{calibration(0)};
    const std::size_t n = 3000;
    std::vector<double> e1(n, 1.0e-3), e2(n, 2.0e-3);
    ProcessedSpectrum a = processed(0, 4.14e9, e1, 1e-3);
    ProcessedSpectrum b = processed(1, 4.14e9, e2, 2e-3);
    const std::vector<ProcessedSpectrum> both{a, b};
    const CombinedSpectrum c = combine_spectra(both, cals, 2.0, LineshapeParams{});
    const auto v = expected_signal(a, cals[0], 2.0, LineshapeParams{});
    // weights 4 : 1
    const std::size_t j = n / 2;
    CHECK(c.y[j] * v[j] == doctest::Approx((4.0 * 1e-3 + 1.0 * 2e-3) / 5.0));
    CHECK(c.n_contrib[j] == 2);

    // equal sigma: the combined std drops by sqrt 2
    b.sigma = 1e-3;
    const std::vector<ProcessedSpectrum> equal{a, b};
    const CombinedSpectrum ce = combine_spectra(equal, cals, 2.0, LineshapeParams{});
    CHECK(std::sqrt(ce.var[j]) * v[j] == doctest::Approx(1e-3 / std::sqrt(2.0)));
}

TEST_CASE("combination respects the grid and skip windows") {
    const std::vector<CalibrationResult> cals{calibration(0)};
    const ProcessedSpectrum a = processed(0, 4.14e9, std::vector<double>(2000, 0.0), 1e-3);
    ProcessedSpectrum b = processed(1, 4.14e9 + 1000 * 100.0, std::vector<double>(2000, 0.0), 1e-3);
    const std::vector<ProcessedSpectrum> both{a, b};
    const FrequencyWindow skip{4.14e9 + 100e3, 4.14e9 + 110e3};
    const CombinedSpectrum c = combine_spectra(both, cals, 2.0, LineshapeParams{}, std::span(&skip, 1));
    CHECK(c.size() == 3000);
    CHECK(c.n_contrib[500] == 1);
    CHECK(c.n_contrib[1500] == 2);
    CHECK(std::isnan(c.y[1050]));

    b.nu_start += 30.0;
    const std::vector<ProcessedSpectrum> off{a, b};
    CHECK_THROWS_AS(combine_spectra(off, cals, 2.0, LineshapeParams{}), DomainError);
}

TEST_CASE("coadd standardises white noise and recovers a kernel-shaped excess") {
    const std::size_t n = 20000;
    std::vector<double> kernel{0.1, 0.4, 0.3, 0.2};
    CombinedSpectrum c;
    c.nu_start = 4.14e9;
    c.y.assign(n, 0.0);
    c.var.assign(n, 4.0);
    c.n_contrib.assign(n, 1);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 2.0);
    for (double& y : c.y) y = g(rng);
    const GrandSpectrum noise = coadd_grand(c, kernel, FilterTransfer{});
    std::vector<double> x;
    for (double v : noise.x) if (std::isfinite(v)) x.push_back(v);
    CHECK(x.size() == n - 3);
    CHECK(testing::variance(x) == doctest::Approx(1.0).epsilon(0.03));

    // noiseless signal g^2 p at bin a: x = g^2 eta exactly
    std::fill(c.y.begin(), c.y.end(), 0.0);
    for (std::size_t j = 0; j < 4; ++j) c.y[100 + j] = 3.0 * kernel[j];
    c.y[5000] = std::nan("");
    c.var[5000] = INFINITY;
    const FilterTransfer t{0.9, 0.95};
    const GrandSpectrum s = coadd_grand(c, kernel, t);
    CHECK(s.x[100] * t.transfer == doctest::Approx(3.0 * s.eta_sens[100]));
    CHECK(s.transfer == 0.9);
    CHECK(std::isnan(s.x[4998]));
    CHECK(s.eta_sens[4998] == 0.0);
    CHECK(std::isfinite(s.x[5001]));
}

TEST_CASE("rescan candidates") {
    GrandSpectrum g;
    g.nu_start = 4.14e9;
    g.x.assign(1000, 0.0);
    g.x[100] = 4.0;
    g.x[103] = 5.0;  // same run as 100
    g.x[500] = 3.5;
    g.x[700] = 3.4;  // below threshold
    g.x[800] = std::nan("");
    const auto c = flag_rescans(g, 3.455, 10);
    REQUIRE(c.size() == 2);
    CHECK(c[0].bin == 103);
    CHECK(c[0].x == 5.0);
    CHECK(c[1].bin == 500);
    CHECK(c[1].nu_hz == doctest::Approx(4.14e9 + 500 * 100.0));
}

TEST_CASE("filter transfer of a narrow line") {
    const auto kernel = lineshape_kernel(4.14e9, LineshapeParams{});
    const FilterTransfer t = filter_transfer(kernel, FilterSettings{}, 100.0, 50, true);
    CHECK(t.transfer > 0.85);
    CHECK(t.transfer < 1.0);
    CHECK(t.noise_factor > 0.85);
    CHECK(t.noise_factor < 1.0);
    const FilterTransfer no_if = filter_transfer(kernel, FilterSettings{}, 100.0, 0, false);
    CHECK(no_if.transfer > t.transfer);
    CHECK(lineshape_extent_bins(kernel) > 10);
    CHECK(lineshape_extent_bins(kernel) < 60);
}

}
