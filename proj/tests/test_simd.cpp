#include "haloscan/simd/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace haloscan::simd;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

std::vector<const KernelTable*> variants() {
    std::vector<const KernelTable*> out;
    if (auto* k = avx2_kernels()) out.push_back(k);
    if (auto* k = neon_kernels()) out.push_back(k);
    return out;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12).scale(1.0));
    }
}

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("active table is one of the known variants") {
    const KernelTable& k = kernels();
    CHECK((k.isa == Isa::scalar || k.isa == Isa::avx2 || k.isa == Isa::neon));
    CHECK(!isa_name(k.isa).empty());
}

TEST_CASE("vector kernels agree with the scalar reference") {
    const KernelTable& ref = scalar_kernels();
    // odd sizes exercise the tails
    for (std::size_t n : {1u, 3u, 7u, 64u, 1001u}) {
        const auto x = noise(n + 40, 1);
        const auto taps = noise(41, 2);
        const auto s = noise(n, 3);
        auto w = noise(n, 4);
        for (double& v : w) v = std::abs(v) + 0.1;
        const auto eta = noise(n, 5);

        for (const KernelTable* k : variants()) {
            CAPTURE(isa_name(k->isa));
            std::vector<double> a(n), b(n);
            ref.correlate(x, taps, a);
            k->correlate(x, taps, b);
            check_close(a, b);

            std::vector<double> num_a(n, 1.0), den_a(n, 2.0), num_b(n, 1.0), den_b(n, 2.0);
            const std::span<const double> e(x.data(), n);
            ref.accumulate_ml(e, s, w, num_a, den_a);
            k->accumulate_ml(e, s, w, num_b, den_b);
            check_close(num_a, num_b);
            check_close(den_a, den_b);

            ref.log_updates(s, eta, 1.7, a);
            k->log_updates(s, eta, 1.7, b);
            check_close(a, b);

            ref.lorentzian(s, 0.3, 2.5, a);
            k->lorentzian(s, 0.3, 2.5, b);
            check_close(a, b);
        }
    }
}

TEST_CASE("scalar kernels follow their definitions") {
    const KernelTable& k = scalar_kernels();
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> taps{1, -1};
    std::vector<double> out(3);
    k.correlate(x, taps, out);
    CHECK(out == std::vector<double>{-1, -1, -1});

    std::vector<double> mu_out(1);
    k.log_updates(std::vector<double>{2.0}, std::vector<double>{0.5}, 4.0, mu_out);
    CHECK(mu_out[0] == doctest::Approx(2.0 * 2.0 - 2.0));  // mu = 2

    k.lorentzian(std::vector<double>{1.0}, 1.0, 3.0, mu_out);
    CHECK(mu_out[0] == doctest::Approx(1.5));
}

}
