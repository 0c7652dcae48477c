#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mtds/bernoulli.hpp"
#include "mtds/complexops.hpp"
#include "mtds/errors.hpp"
#include "mtds/gamma.hpp"

using namespace mtds;

namespace {

// Independent Stirling reference: shift far right, 30 Bernoulli corrections.
cplx log_gamma_stirling_oracle(cplx z) {
    int shift = 0;
    while (std::abs(z) < 40.0) {
        ++shift;
        z += 1.0;
    }
    cplx acc = (z - 0.5) * std::log(z) - z + 0.5 * std::log(TWO_PI);
    cplx zp = 1.0 / z;
    cplx z2 = zp * zp;
    for (int k = 1; k <= 30; ++k) {
        acc += bernoulli_d(2 * k) / double(2 * k * (2 * k - 1)) * zp;
        zp *= z2;
    }
    for (int j = 0; j < shift; ++j) acc -= std::log(z - double(j + 1));
    return acc;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("log_gamma classical values") {
    CHECK(std::abs(log_gamma(cplx(1.0)) - cplx(0.0)) < 1e-14);
    CHECK(std::abs(log_gamma(cplx(0.5)) - std::log(std::sqrt(PI))) < 1e-14);
    CHECK(std::abs(std::exp(log_gamma(cplx(5.0))) - 24.0) < 1e-12);
}

TEST_CASE("log_gamma against the Stirling oracle") {
    cplx z(4.0, 3.0);
    CHECK(rel(log_gamma(z), log_gamma_stirling_oracle(z)) < 1e-13);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ur(-15.0, 15.0);
    int tested = 0;
    while (tested < 400) {
        cplx w(ur(rng), ur(rng));
        if (near_gamma_pole(w, 0.1)) continue;
        if (w.real() <= 0.5 && std::abs(w.imag()) < 0.1 &&
            std::abs(w.real() - std::round(w.real())) < 0.1)
            continue;
        CHECK(rel(log_gamma(w), log_gamma_stirling_oracle(w)) < 5e-12);
        ++tested;
    }
}

TEST_CASE("recurrence and reflection properties") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ur(-20.0, 20.0);
    int n = 0;
    while (n < 1000) {
        cplx z(ur(rng), ur(rng));
        if (std::abs(z) > 20.0) continue;
        bool near_pole = false;
        for (int k = 0; k < 25; ++k)
            if (std::abs(z + double(k)) < 0.1 || std::abs(1.0 - z + double(-k)) < 0.1)
                near_pole = true;
        if (near_pole) continue;
        cplx g = std::exp(log_gamma(z));
        cplx g1 = std::exp(log_gamma(z + 1.0));
        CHECK(rel(g1, z * g) < 1e-12);
        cplx lhs = g * std::exp(log_gamma(1.0 - z));
        cplx rhs = PI / std::sin(PI * z);
        CHECK(rel(lhs, rhs) < 1e-10);
        ++n;
    }
}

TEST_CASE("log_gamma branch continuity along a vertical line") {
    // principal branch: imaginary part must vary continuously, no 2*pi jumps
    cplx prev = log_gamma(cplx(-2.3, 0.05));
    for (int i = 1; i <= 400; ++i) {
        cplx cur = log_gamma(cplx(-2.3, 0.05 + 0.05 * i));
        CHECK(std::abs(cur.imag() - prev.imag()) < 1.0);
        prev = cur;
    }
}

TEST_CASE("log_gamma pole error") {
    CHECK_THROWS_AS((void)log_gamma(cplx(0.0)), Error);
    CHECK_THROWS_AS((void)log_gamma(cplx(-3.0)), Error);
}

TEST_CASE("gamma_ratio") {
    CHECK(rel(gamma_ratio({cplx(3.0)}, {cplx(2.0)}), 2.0) < 1e-14);
    CHECK(rel(gamma_ratio({cplx(0.5), cplx(0.5)}, {cplx(1.0)}), PI) < 1e-14);
    // product of direct evaluations at (s_r, s_{r+1}) = (-0.5, 4)
    cplx sr(-0.5), sr1(4.0);
    cplx want = std::exp(log_gamma(1.0 - sr)) * std::exp(log_gamma(sr + sr1 - 1.0)) /
                std::exp(log_gamma(sr1));
    CHECK(rel(gamma_ratio({1.0 - sr, sr + sr1 - 1.0}, {sr1}), want) < 1e-13);
    CHECK_THROWS_AS((void)gamma_ratio({cplx(-2.0)}, {cplx(1.0)}), Error);
    CHECK_THROWS_AS((void)gamma_ratio({cplx(1.0)}, {cplx(0.0)}), Error);
}

TEST_CASE("pochhammer") {
    CHECK(std::abs(pochhammer(cplx(2.0), 3) - 24.0) < 1e-13);
    CHECK(std::abs(pochhammer(cplx(-1.0), 3)) == 0.0);
    cplx a(0.5, 1.0);
    CHECK(rel(pochhammer(a, 5), gamma_ratio({a + 5.0}, {a})) < 1e-12);
    // exact product recurrence
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ur(-4.0, 4.0);
    for (int i = 0; i < 50; ++i) {
        cplx x(ur(rng), ur(rng));
        int j = int(rng() % 6), k = int(rng() % 6);
        CHECK(rel(pochhammer(x, j + k), pochhammer(x, j) * pochhammer(x + double(j), k)) <
              1e-13);
    }
}

TEST_CASE("principal_power with declared arguments") {
    BranchedBase b1 = BranchedBase::imag_axis(TWO_PI, +1); // 2*pi*i
    CHECK(rel(principal_power(b1, cplx(2.0)), cplx(-4.0 * PI * PI, 0.0)) < 1e-14);
    BranchedBase b2 = BranchedBase::imag_axis(TWO_PI, -1);
    CHECK(rel(principal_power(b2, cplx(1.0)), cplx(0.0, -TWO_PI)) < 1e-14);
    BranchedBase b3 = BranchedBase::imag_axis(3.0 * TWO_PI, +1);
    cplx z(-0.5, 2.0);
    cplx want = std::exp(z * cplx(std::log(3.0 * TWO_PI), PI / 2));
    CHECK(rel(principal_power(b3, z), want) < 1e-14);
    // exact power addition law (same log)
    cplx z1(0.3, -1.2), z2(-2.0, 0.7);
    CHECK(rel(principal_power(b3, z1 + z2),
              principal_power(b3, z1) * principal_power(b3, z2)) < 1e-12);
    CHECK_THROWS_AS(BranchedBase(cplx(0.0)), Error);
    CHECK_THROWS_AS(BranchedBase(cplx(1.0), 2.0), Error); // inconsistent arg
}

TEST_CASE("bernoulli numbers") {
    CHECK(bernoulli(0) == Rational(1));
    CHECK(bernoulli(1) == Rational(-1, 2));
    CHECK(bernoulli(2) == Rational(1, 6));
    CHECK(bernoulli(12) == Rational(-691, 2730));
    // defining recurrence as an exact oracle: sum_k C(n+1,k) B_k = 0
    using boost::multiprecision::cpp_int;
    for (int n = 1; n <= 60; ++n) {
        Rational acc = 0;
        cpp_int binom = 1;
        for (int k = 0; k <= n; ++k) {
            acc += Rational(binom) * bernoulli(k);
            binom = binom * (n + 1 - k) / (k + 1);
        }
        CHECK(acc == 0);
    }
    CHECK_THROWS_AS((void)bernoulli(61), Error);
    CHECK_THROWS_AS((void)bernoulli(-1), Error);
}

TEST_CASE("digamma sanity") {
    constexpr double EG = 0.57721566490153286060651209008240;
    CHECK(std::abs(digamma(cplx(1.0)) + EG) < 1e-13);
    CHECK(std::abs(digamma(cplx(2.0)) - (1.0 - EG)) < 1e-13);
    // psi(z+1) = psi(z) + 1/z
    cplx z(0.7, 2.3);
    CHECK(std::abs(digamma(z + 1.0) - digamma(z) - 1.0 / z) < 1e-12);
}
