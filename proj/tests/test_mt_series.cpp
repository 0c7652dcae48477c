#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mtds/errors.hpp"
#include "mtds/gamma.hpp"
#include "mtds/mt_series.hpp"
#include "mtds/psi.hpp"
#include "mtds/zeta.hpp"

using namespace mtds;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<CoefficientSequence> ones_list(int r) {
    return std::vector<CoefficientSequence>(size_t(r), coeff_ones());
}

// independent double-sum oracle for the Tornheim point (1,1,1):
// T = sum_m H_m / m^2 with the analytic tail (log M + gamma + 1)/M + ...
double tornheim111_oracle() {
    const long long M = 200000;
    constexpr double EG = 0.57721566490153286060651209008240;
    double H = 0.0, acc = 0.0;
    for (long long m = 1; m <= M; ++m) {
        H += 1.0 / double(m);
        acc += H / double(m) / double(m);
    }
    // sum_{m>M} H_m/m^2 ~ int (log x + g)/x^2 + H-correction
    double tail = (std::log(double(M)) + EG + 1.0) / double(M) + 0.5 / double(M) / double(M);
    return acc + tail;
}

} // namespace

TEST_CASE("in_convergence_region") {
    {
        MtPoint p(2, {cplx(3), cplx(-0.5), cplx(4)});
        auto rc = in_convergence_region(p, {0.0, 0.0});
        CHECK(rc.ok);
        CHECK(rc.worst_margin == doctest::Approx(2.5)); // subset {2}: -0.5 + 4 - 1
    }
    {
        MtPoint p(2, {cplx(1), cplx(1), cplx(0)});
        auto rc = in_convergence_region(p, {0.0, 0.0});
        CHECK(!rc.ok);
        CHECK(rc.worst_subset == std::vector<int>{1, 2});
    }
    {
        MtPoint p(3, {cplx(3), cplx(2), cplx(2), cplx(2)});
        auto rc = in_convergence_region(p, {1.0, 0.0, 0.0});
        CHECK(rc.ok);
    }
}

TEST_CASE("mt_direct depth 1 and the Tornheim value") {
    MtPoint p1(1, {cplx(0), cplx(2)});
    CHECK(rel(mt_direct(p1, ones_list(1), 1e-10).value, PI * PI / 6.0) < 1e-12);

    MtPoint p(2, {cplx(1), cplx(1), cplx(1)});
    MtResult r = mt_direct(p, ones_list(2), 1e-6);
    CHECK(r.trunc.tail_bound <= 1e-6);
    double oracle = tornheim111_oracle();
    CHECK(std::abs(r.value.real() - oracle) < 3e-5); // oracle accuracy limit
    CHECK(std::abs(r.value.real() - 2.4041138063191886) < 1e-6);
    CHECK(std::abs(r.value.imag()) < 1e-12);
}

TEST_CASE("mt_direct refusals") {
    MtPoint p(2, {cplx(1), cplx(1), cplx(0)});
    CHECK_THROWS_AS((void)mt_direct(p, ones_list(2), 1e-6), Error);
    try {
        (void)mt_direct(p, ones_list(2), 1e-6);
    } catch (const Error& e) {
        CHECK(e.kind == ErrKind::region);
        CHECK(std::string(e.what()).find("{1,2}") != std::string::npos);
    }
}

TEST_CASE("mt_direct reordered-summation oracle with a character twist") {
    // sum chi4(m1) m1^{-3} (m1+m2)^{-3}: brute force with roles swapped
    MtPoint p(2, {cplx(3), cplx(0), cplx(3)});
    std::vector<CoefficientSequence> cs{parse_coeff("char:4:1"), coeff_ones()};
    MtResult lib = mt_direct(p, cs, 1e-9);
    cplx brute = 0.0;
    auto chi = character(4, 1);
    for (long long m2 = 1; m2 <= 4000; ++m2)
        for (long long m1 = 1; m1 <= 3001; m1 += 2)
            brute += chi(m1) * std::exp(-3.0 * std::log(double(m1)) -
                                        3.0 * std::log(double(m1 + m2)));
    CHECK(std::abs(lib.value - brute) < 2e-7); // brute truncation scale
}

TEST_CASE("mt_direct permutation symmetry in the first r slots") {
    std::vector<CoefficientSequence> cs = ones_list(2);
    MtPoint a(2, {cplx(3), cplx(2.5), cplx(2)});
    MtPoint b(2, {cplx(2.5), cplx(3), cplx(2)});
    MtResult ra = mt_direct(a, cs, 1e-10), rb = mt_direct(b, cs, 1e-10);
    CHECK(std::abs(ra.value - rb.value) <= ra.trunc.tail_bound + rb.trunc.tail_bound + 1e-12);
}

TEST_CASE("mt_direct linearity in a coefficient sequence") {
    auto chi = character(5, 1);
    auto chib = conjugate_character(chi);
    CoefficientSequence sum;
    sum.kind = CoefficientSequence::Kind::custom;
    sum.label = "chi+conj";
    sum.alpha = 0.0;
    sum.principal_like = false;
    sum.real_valued = true;
    auto c1 = coeff_character(chi), c2 = coeff_character(chib);
    sum.custom_value = [c1, c2](long long n) { return c1.value(n) + c2.value(n); };
    sum.custom_l = [c1, c2](cplx s) { return c1.l_eval(s) + c2.l_eval(s); };

    MtPoint p(2, {cplx(3), cplx(2.2), cplx(2)});
    std::vector<CoefficientSequence> a{sum, coeff_ones()};
    std::vector<CoefficientSequence> b1{c1, coeff_ones()};
    std::vector<CoefficientSequence> b2{c2, coeff_ones()};
    cplx lhs = mt_direct(p, a, 1e-9).value;
    cplx rhs = mt_direct(p, b1, 1e-9).value + mt_direct(p, b2, 1e-9).value;
    CHECK(std::abs(lhs - rhs) < 1e-8);
}

TEST_CASE("convolved_coefficient") {
    auto ones = coeff_ones();
    CHECK(std::abs(convolved_coefficient(cplx(1), ones, {ones}, {6}) - 12.0) < 1e-12);
    CHECK(std::abs(convolved_coefficient(cplx(0), ones, {ones, ones}, {4, 6}) - 2.0) < 1e-12);
    auto chi4 = parse_coeff("char:4:1");
    CHECK(std::abs(convolved_coefficient(cplx(2), chi4, {ones, ones}, {5, 5}) - 26.0) < 1e-12);
}

TEST_CASE("sigma_mt") {
    CHECK(std::abs(sigma_mt({cplx(0), cplx(0), cplx(1)}, {1, 1}) - 2.0) < 1e-13);
    CHECK(std::abs(sigma_mt({cplx(1), cplx(1), cplx(0)}, {2, 2}) - 9.0) < 1e-13);
    CHECK(std::abs(sigma_mt({cplx(0), cplx(0), cplx(0)}, {2, 4}) - 4.0) < 1e-13);
    // depth-1 reduction: sigma_mt(s1, w; l) = sigma_{s1+w}(l)
    cplx v = sigma_mt({cplx(3), cplx(2.5)}, {6});
    cplx want = 0.0;
    for (long long d : {1, 2, 3, 6}) want += std::pow(double(d), 5.5);
    CHECK(rel(v, want) < 1e-13);
}

TEST_CASE("f_series at the reference point") {
    MtPoint p(2, {cplx(3), cplx(-0.5), cplx(4)});
    auto cs = ones_list(2);
    REQUIRE(f_series_admissible(p, cs));
    FSeriesResult fp = f_series(1.0, p, cs, +1, 1e-10);
    CHECK(fp.trunc.tail_bound <= 1e-10);
    // frozen from two independent high-precision runs of the tail-completed
    // series (stable under doubling the box and the expansion order)
    CHECK(std::abs(fp.value - cplx(0.001335099280191277, 0.000508857248147808)) < 5e-10);

    // conjugation symmetry for real parameters
    FSeriesResult fm = f_series(1.0, p, cs, -1, 1e-10);
    CHECK(std::abs(fm.value - std::conj(fp.value)) < 1e-10);

    // term-by-term partial sum with independent contour Psi values
    cplx partial = 0.0;
    for (long long l = 1; l <= 40; ++l) {
        cplx conv = 0.0;
        for (long long n = 1; n <= l; ++n)
            if (l % n == 0) conv += std::exp(5.5 * std::log(double(n)));
        partial += conv * std::exp(-3.0 * std::log(double(l))) *
                   psi_contour_quality(cplx(4), cplx(3.5),
                                       BranchedBase::imag_axis(TWO_PI * double(l), +1))
                       .value;
    }
    // remaining tail is ~ l^{-1.5}: crude envelope
    CHECK(std::abs(fp.value - partial) < 0.02 * std::abs(partial) + 2e-4);
}

TEST_CASE("f_series vs f_series_continued overlap and N-stability") {
    MtPoint p(2, {cplx(3), cplx(-0.5), cplx(4)});
    auto cs = ones_list(2);
    cplx direct = f_series(1.0, p, cs, +1, 1e-10).value;
    cplx cont = f_series_continued(1.0, p, cs, +1, 12, 1e-8);
    CHECK(std::abs(direct - cont) < 2e-8);

    MtPoint q(2, {cplx(3), cplx(0.5), cplx(0.2)});
    CHECK(!f_series_admissible(q, cs));
    cplx v15 = f_series_continued(1.0, q, cs, +1, 15, 1e-8);
    cplx v20 = f_series_continued(1.0, q, cs, +1, 20, 1e-8);
    cplx v25 = f_series_continued(1.0, q, cs, +1, 25, 1e-8);
    CHECK(std::abs(v15 - v20) < 1e-7);
    CHECK(std::abs(v20 - v25) < 1e-7);

    CHECK_THROWS_AS((void)f_series_continued(1.0, q, cs, +1, 1, 1e-8), Error); // N too small
    CHECK_THROWS_AS((void)f_series(1.0, q, cs, +1, 1e-8), Error);
}

TEST_CASE("mt_via_mb dual route") {
    auto cs = ones_list(2);
    MtPoint p(2, {cplx(3), cplx(3), cplx(3)});
    cplx mb = mt_via_mb(p, cs, -0.5);
    cplx direct = mt_direct(p, cs, 1e-9).value;
    CHECK(rel(mb, direct) < 1e-7);

    // base case r = 1 without quadrature
    MtPoint p1(1, {cplx(1), cplx(2)});
    CHECK(rel(mt_via_mb(p1, ones_list(1), -0.5), riemann_zeta(cplx(3))) < 1e-12);

    std::vector<CoefficientSequence> cchi{coeff_ones(), parse_coeff("char:4:1")};
    MtPoint p2(2, {cplx(3), cplx(2), cplx(2)});
    CHECK(rel(mt_via_mb(p2, cchi, -0.5), mt_direct(p2, cchi, 1e-9).value) < 1e-7);

    CHECK_THROWS_AS((void)mt_via_mb(p, cs, -3.5), Error); // outside the window
}

TEST_CASE("mt_continued extends the direct evaluation") {
    auto cs = ones_list(2);
    MtPoint deep(2, {cplx(3), cplx(2.3), cplx(2)});
    CHECK(rel(mt_continued(deep, cs), mt_direct(deep, cs, 1e-11).value) < 1e-9);

    std::vector<CoefficientSequence> cchi{coeff_ones(), parse_coeff("char:4:1")};
    CHECK(rel(mt_continued(deep, cchi), mt_direct(deep, cchi, 1e-11).value) < 1e-9);

    // continued value at a point outside the region: cross-checked through the
    // rearranged identity in the verify tests; here just smoke-test finiteness
    MtPoint off(2, {cplx(3), cplx(0.5), cplx(0.2)});
    cplx v = mt_continued(off, cs);
    CHECK(std::isfinite(v.real()));
    CHECK(std::isfinite(v.imag()));
}

TEST_CASE("modified function g") {
    MtPoint bad(2, {cplx(3), cplx(3), cplx(3)});
    CHECK_THROWS_AS((void)g_modified(bad), Error); // Gamma(1 - s_r) pole at s_r = 3

    MtPoint p(2, {cplx(3), cplx(-0.5), cplx(4)});
    cplx g = g_modified(p, 1e-10);
    cplx manual = mt_direct(p, ones_list(2), 1e-11).value -
                  gamma_ratio({cplx(1.5), cplx(2.5)}, {cplx(4)}) * riemann_zeta(cplx(5.5));
    CHECK(std::abs(g - manual) < 1e-9);

    // linearity of the twisted modified function in the first slot
    std::vector<CoefficientSequence> cchi{parse_coeff("char:4:1"), coeff_ones()};
    cplx g1 = big_g_modified(p, cchi, 1e-9);
    CoefficientSequence doubled;
    doubled.kind = CoefficientSequence::Kind::custom;
    doubled.label = "2*chi4";
    doubled.alpha = 0.0;
    doubled.principal_like = false;
    auto base = cchi[0];
    doubled.custom_value = [base](long long n) { return 2.0 * base.value(n); };
    doubled.custom_l = [base](cplx s) { return 2.0 * base.l_eval(s); };
    std::vector<CoefficientSequence> cdbl{doubled, coeff_ones()};
    cplx g2 = big_g_modified(p, cdbl, 1e-9);
    CHECK(std::abs(g2 - 2.0 * g1) < 1e-7);
}

TEST_CASE("series product identity at desk scale (gcd convolution)") {
    // L_1(s - b) * MT(p) equals the convolved-numerator sum; both sides here
    // by brute truncation at the same caps, difference within the two tails
    auto ones = coeff_ones();
    MtPoint p(2, {cplx(3), cplx(3), cplx(3)});
    for (double bv : {0.0, 1.0}) {
        cplx b(bv);
        cplx s = p.s[0] + p.s[1] + p.s[2];
        const long long K = 120;
        cplx lhs_mt = 0.0, rhs = 0.0;
        for (long long m1 = 1; m1 <= K; ++m1)
            for (long long m2 = 1; m2 <= K; ++m2) {
                cplx base = std::exp(-p.s[0] * std::log(double(m1)) -
                                     p.s[1] * std::log(double(m2)) -
                                     p.s[2] * std::log(double(m1 + m2)));
                lhs_mt += base;
                rhs += convolved_coefficient(b, ones, {ones, ones}, {m1, m2}) * base;
            }
        cplx lhs = ones.l_eval(s - b) * lhs_mt;
        // crude common tail envelope
        CHECK(std::abs(lhs - rhs) < 1e-3 * std::abs(lhs) + 1e-4);
    }
}
