#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mtds/errors.hpp"
#include "mtds/psi.hpp"

using namespace mtds;

namespace {
double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
} // namespace

TEST_CASE("closed form Psi(a, a+1; x) = x^{-a}") {
    BranchedBase x5 = BranchedBase::positive_real(5.0);
    CHECK(rel(psi_integral(cplx(1), cplx(2), x5, 0.0, 256).value, 0.2) < 1e-9);
    CHECK(rel(psi_mellin_barnes(cplx(1), cplx(2), x5, -0.5, 40.0, 0.05).value, 0.2) < 1e-9);
    CHECK(rel(psi(cplx(1), cplx(2), x5).value, 0.2) < 1e-12);

    BranchedBase x1 = BranchedBase::positive_real(1.0);
    CHECK(rel(psi_integral(cplx(2), cplx(3), x1, 0.0, 256).value, 1.0) < 1e-9);

    // family over random admissible parameters, every applicable route
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ua(0.1, 4.9), um(1.0, 100.0), uarg(-PI / 2, PI / 2);
    for (int i = 0; i < 50; ++i) {
        double a = ua(rng), m = um(rng), th = uarg(rng);
        BranchedBase x(m * cis(th), th);
        cplx want = std::exp(-cplx(a) * x.log());
        CHECK(rel(psi(cplx(a), cplx(a + 1.0), x).value, want) < 1e-9);
        CHECK(rel(psi_integral(cplx(a), cplx(a + 1.0), x, -th / 2, 384).value, want) < 1e-7);
        if (m >= TWO_PI) {
            double bound;
            int N = psi_best_N(cplx(a), cplx(a + 1.0), m, &bound);
            CHECK(rel(psi_asymptotic(cplx(a), cplx(a + 1.0), x, N).value, want) < 1e-9);
        }
    }
}

TEST_CASE("cross-route agreement at (4, 3.5, 2*pi*i)") {
    cplx a(4.0), c(3.5);
    BranchedBase x = BranchedBase::imag_axis(TWO_PI, +1);
    PsiEvaluation mb = psi_mellin_barnes(a, c, x, -3.0, 50.0, 0.05);
    PsiEvaluation in = psi_integral(a, c, x, -PI / 4, 512);
    PsiEvaluation as = psi_asymptotic(a, c, x, 20);
    CHECK(std::abs(mb.value - in.value) < 1e-8 * std::abs(mb.value) + in.error_bound);
    CHECK(std::abs(mb.value - as.value) <= mb.error_bound + as.error_bound);
}

TEST_CASE("mellin-barnes respects the validity window") {
    cplx a(4.0), c(3.5);
    BranchedBase x = BranchedBase::imag_axis(TWO_PI, +1);
    CHECK_THROWS_AS((void)psi_mellin_barnes(a, c, x, -0.5, 40.0, 0.05), Error); // gamma too high
    // empty window: (a, c) = (0.2, 1.7) has (-0.2, -0.7)
    CHECK_THROWS_AS((void)psi_mellin_barnes(cplx(0.2), cplx(1.7), x, -0.45, 40.0, 0.05), Error);
    // residue-collecting contour still evaluates it
    PsiEvaluation ev = psi_mellin_barnes_auto(cplx(0.2), cplx(1.7), x);
    PsiReflection r = psi_reflect(cplx(0.2), cplx(1.7), x);
    // reflected parameters (a', c') = (-0.5, 0.3): compare with reflected auto route
    PsiEvaluation in = psi_mellin_barnes_auto(r.a, r.c, x);
    CHECK(rel(ev.value, r.prefactor * in.value) < 1e-8);
}

TEST_CASE("asymptotic remainder bound behaves") {
    // leading term of the exact closed form
    BranchedBase big = BranchedBase::positive_real(1e6);
    PsiEvaluation ev = psi_asymptotic(cplx(1), cplx(2), big, 1);
    CHECK(rel(ev.value, 1e-6) < 1e-15);
    CHECK(ev.error_bound <= 1e-12 * std::abs(ev.value));

    // single-term expansion at the paper-style parameters
    cplx sr(-0.5), sr1(4.0);
    BranchedBase x3 = BranchedBase::imag_axis(TWO_PI * 3.0, +1);
    PsiEvaluation lead = psi_asymptotic(sr1, sr + sr1, x3, 1);
    cplx want = std::exp(-sr1 * x3.log());
    CHECK(rel(lead.value, want) < 1e-15);

    CHECK_THROWS_AS((void)psi_asymptotic(cplx(1), cplx(2), BranchedBase::positive_real(1.0), 5),
                    Error); // |x| < 2 pi policy
}

TEST_CASE("reflection identity and involution") {
    BranchedBase x = BranchedBase::imag_axis(TWO_PI, +1);
    PsiReflection r1 = psi_reflect(cplx(1), cplx(2), x);
    CHECK(std::abs(r1.a) < 1e-15);
    CHECK(std::abs(r1.c) < 1e-15);
    CHECK(rel(r1.prefactor, std::exp(-x.log())) < 1e-14);

    PsiReflection r2 = psi_reflect(cplx(4), cplx(3.5), x);
    PsiReflection r3 = psi_reflect(r2.a, r2.c, x);
    CHECK(std::abs(r3.a - cplx(4)) < 1e-13);
    CHECK(std::abs(r3.c - cplx(3.5)) < 1e-13);
    CHECK(rel(r2.prefactor * r3.prefactor, 1.0) < 1e-12);

    // paper-style substitution (a, c) = (s_{r+1}, s_r + s_{r+1})
    cplx sr(-0.5), sr1(4.0);
    PsiReflection r4 = psi_reflect(sr1, sr + sr1, x);
    CHECK(std::abs(r4.a - (1.0 - sr)) < 1e-14);
    CHECK(std::abs(r4.c - (2.0 - sr - sr1)) < 1e-14);

    // identity numerically on admissible points
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> ua(0.3, 3.0), uc(-1.5, 0.9), um(7.0, 80.0),
        uarg(-1.2, 1.2);
    for (int i = 0; i < 50; ++i) {
        cplx a(ua(rng)), c(uc(rng));
        if (std::abs(a - c + 1.0) < 0.1 || std::abs(a - c) < 0.05) continue;
        BranchedBase x2(um(rng) * cis(uarg(rng)));
        PsiReflection r = psi_reflect(a, c, x2);
        cplx lhs = psi_contour_quality(a, c, x2).value;
        cplx rhs = r.prefactor * psi_contour_quality(r.a, r.c, x2).value;
        CHECK(rel(lhs, rhs) < 1e-8);
    }
}

TEST_CASE("route selector") {
    // closed form by any route
    CHECK(rel(psi(cplx(1), cplx(2), BranchedBase::positive_real(5.0)).value, 0.2) < 1e-10);

    // large |x|: asymptotic route with self-consistency at increased N
    BranchedBase xb = BranchedBase::imag_axis(TWO_PI * 100.0, +1);
    PsiEvaluation ev = psi(cplx(4), cplx(3.5), xb);
    CHECK(ev.params.route == "asymptotic");
    PsiEvaluation ev5 = psi_asymptotic(cplx(4), cplx(3.5), xb, ev.params.N + 5);
    CHECK(std::abs(ev.value - ev5.value) <= ev.error_bound + ev5.error_bound);

    // Re a < 0: reflection then contour
    BranchedBase x1 = BranchedBase::imag_axis(TWO_PI, +1);
    PsiEvaluation er = psi(cplx(-0.5), cplx(0.3), x1);
    PsiReflection r = psi_reflect(cplx(-0.5), cplx(0.3), x1);
    cplx manual = r.prefactor * psi_mellin_barnes_auto(r.a, r.c, x1).value;
    CHECK(rel(er.value, manual) < 1e-8);

    CHECK_THROWS_AS((void)psi(cplx(1), cplx(2), BranchedBase(cplx(1.0), TWO_PI), 1e-10), Error);
}

TEST_CASE("monotone refinement") {
    cplx a(1.3, 0.4), c(0.2, -0.3);
    BranchedBase x = BranchedBase::imag_axis(3.0 * TWO_PI, +1);
    PsiEvaluation rich = psi_mellin_barnes(a, c, x, -0.65, 80.0, 0.0125);
    PsiEvaluation coarse = psi_mellin_barnes(a, c, x, -0.65, 40.0, 0.05);
    PsiEvaluation fine = psi_mellin_barnes(a, c, x, -0.65, 80.0, 0.025);
    double dev_coarse = std::abs(coarse.value - rich.value);
    double dev_fine = std::abs(fine.value - rich.value);
    CHECK(dev_fine <= dev_coarse + coarse.error_bound);

    PsiEvaluation i1 = psi_integral(cplx(2.5), c, x, -PI / 4, 256);
    PsiEvaluation i2 = psi_integral(cplx(2.5), c, x, -PI / 4, 512);
    PsiEvaluation i3 = psi_integral(cplx(2.5), c, x, -PI / 4, 1024);
    CHECK(std::abs(i2.value - i3.value) <=
          std::abs(i1.value - i3.value) + i1.error_bound + 1e-14 * std::abs(i3.value));
}

TEST_CASE("integral route preconditions") {
    BranchedBase x = BranchedBase::positive_real(5.0);
    CHECK_THROWS_AS((void)psi_integral(cplx(-1.0), cplx(2), x, 0.0, 256), Error);
    CHECK_THROWS_AS((void)psi_integral(cplx(1), cplx(2), x, 1.8, 256), Error);
    BranchedBase xi = BranchedBase::imag_axis(5.0, +1);
    CHECK_THROWS_AS((void)psi_integral(cplx(1), cplx(2), xi, PI / 2, 256), Error);
}
