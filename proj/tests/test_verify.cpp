#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtds/errors.hpp"
#include "mtds/report.hpp"
#include "mtds/verify.hpp"

using namespace mtds;

namespace {

std::vector<CoefficientSequence> ones_list(int r) {
    return std::vector<CoefficientSequence>(size_t(r), coeff_ones());
}

} // namespace

TEST_CASE("singular locus hyperplanes") {
    SingularLocusSpec spec;
    spec.r = 2;
    spec.principal_indices = {1, 2};
    {
        MtPoint p(2, {cplx(0.5), cplx(0.5), cplx(0.5)});
        auto hit = singular_locus(spec, p);
        CHECK(hit.on); // s_1 + s_3 = 1 with h = 1, l = 0
    }
    {
        MtPoint p(2, {cplx(0.7), cplx(0.9), cplx(0.4)});
        auto hit = singular_locus(spec, p);
        CHECK(hit.on); // s_1 + s_2 + s_3 = 2, h = 2 branch
    }
    {
        SingularLocusSpec none;
        none.r = 2;
        MtPoint p(2, {cplx(0.5), cplx(0.5), cplx(0.5)});
        CHECK(!singular_locus(none, p).on);
    }
    {
        MtPoint p(2, {cplx(3), cplx(-0.5), cplx(4)});
        CHECK(!singular_locus(spec, p).on);
    }
}

TEST_CASE("lemma34_1 at the reference point") {
    MtPoint p(2, {cplx(3), cplx(-0.5), cplx(4)});
    auto rep = check_lemma_34_1(p, ones_list(2), 1e-6);
    CHECK(!rep.skipped);
    CHECK(rep.pass);
    CHECK(rep.rel_residual < 1e-7);

    std::vector<CoefficientSequence> cchi{parse_coeff("char:4:1"), coeff_ones()};
    auto rep2 = check_lemma_34_1(p, cchi, 1e-6);
    CHECK(rep2.pass);

    // hypothesis guard: Re s_r must be negative for ones
    MtPoint bad(2, {cplx(3), cplx(0.5), cplx(4)});
    CHECK_THROWS_AS((void)check_lemma_34_1(bad, ones_list(2), 1e-6), Error);
}

TEST_CASE("thm21 with a continued right side") {
    MtPoint p(2, {cplx(3), cplx(0.5), cplx(0.2)});
    auto rep = check_thm_21(p, ones_list(2), 1e-5);
    CHECK(rep.pass);
    CHECK(rep.params["f_route"] == "continued");

    // coincides with the lemma34_1 rearrangement at the direct point
    MtPoint q(2, {cplx(3), cplx(-0.5), cplx(4)});
    auto a = check_thm_21(q, ones_list(2), 1e-6);
    CHECK(a.pass);

    std::vector<CoefficientSequence> fin{parse_coeff("finite:[1,-1,0,2]"), coeff_ones()};
    MtPoint f(2, {cplx(2.5), cplx(-0.5), cplx(3.5)});
    auto repf = check_thm_21(f, fin, 1e-6);
    CHECK(repf.pass);
}

TEST_CASE("thm22 at the reference point") {
    MtPoint p(2, {cplx(3), cplx(-0.5), cplx(4)});
    for (const char* lbl : {"char:4:1", "char:5:2", "char:5:1"}) {
        std::vector<CoefficientSequence> cs{coeff_ones(), parse_coeff(lbl)};
        auto rep = check_thm_22(p, cs, 1e-6);
        CHECK(rep.pass);
        CHECK(rep.rel_residual < 1e-6);
    }
    // inner slots unrestricted
    std::vector<CoefficientSequence> cs{parse_coeff("char:5:2"), parse_coeff("char:4:1")};
    auto rep = check_thm_22(p, cs, 1e-6);
    CHECK(rep.pass);

    // non-primitive last slot refused
    std::vector<CoefficientSequence> bad{coeff_ones(), parse_coeff("char:4:0")};
    CHECK_THROWS_AS((void)check_thm_22(p, bad, 1e-6), Error);
}

TEST_CASE("thm12 (all ones)") {
    MtPoint p(2, {cplx(3), cplx(-0.5), cplx(4)});
    auto rep = check_thm_12(p, 1e-5);
    CHECK(rep.pass);
    CHECK(rep.rel_residual < 1e-6);

    MtPoint q(2, {cplx(2.5), cplx(-0.7), cplx(3.8)});
    CHECK(check_thm_12(q, 1e-5).pass);
}

TEST_CASE("depth-3 identities") {
    MtPoint p(3, {cplx(3), cplx(3), cplx(-0.5), cplx(4)});
    auto r34 = check_lemma_34_1(p, ones_list(3), 1e-4);
    CHECK(r34.pass);
    auto r22 = check_thm_22(p, {coeff_ones(), coeff_ones(), parse_coeff("char:5:2")}, 1e-4);
    CHECK(r22.pass);
    auto r12 = check_thm_12(p, 1e-4);
    CHECK(r12.pass);
}

TEST_CASE("Choie-Matsumoto double series") {
    auto rep = check_cm(cplx(-0.5), cplx(4.0), coeff_ones(), 1e-6);
    CHECK(rep.pass);

    auto repc = check_cm(cplx(-0.5), cplx(4.0), parse_coeff("char:4:1"), 1e-6);
    CHECK(repc.pass);

    // finite support: lhs is a single shifted sum; brute oracle
    auto A = parse_coeff("finite:[0,1]");
    auto repf = check_cm(cplx(-0.5), cplx(4.0), A, 1e-6);
    CHECK(repf.pass);
    cplx brute = 0.0;
    for (long long m = 1; m <= 2000000; ++m)
        brute += std::exp(0.5 * std::log(double(m)) - 4.0 * std::log(double(m + 2)));
    CHECK(std::abs(repf.lhs - brute) < 1e-8);
}

TEST_CASE("KMT hyperplane functional equation") {
    // quadratic x quadratic mod 5, odd plane (product of parities +1), k = 2
    auto rep = check_kmt(cplx(-0.5), 5, 2, 2, 2, 1e-5);
    CHECK(rep.pass);
    CHECK(rep.rel_residual < 1e-6);

    // order-4 pair mod 5 (also product +1), k = 2
    auto rep2 = check_kmt(cplx(-0.3), 5, 1, 1, 2, 1e-5);
    CHECK(rep2.pass);

    // mixed parity: even plane
    auto rep3 = check_kmt(cplx(-0.5), 5, 2, 1, 2, 1e-5);
    CHECK(rep3.pass);
    CHECK(rep3.params["parity"] == "even");

    // parity mismatch guard
    CHECK_THROWS_AS((void)check_kmt(cplx(-0.5), 5, 2, 1, 2, 1e-5, 1), Error);
}

TEST_CASE("run_grid on a 3x3 patch") {
    GridConfig cfg;
    cfg.identity = "thm21";
    cfg.r = 2;
    cfg.coeff_labels = {"ones", "ones"};
    cfg.axes = {{2.8, 3.2, 0.2}, {-0.5, -0.5, 1.0}, {4.0, 4.4, 0.2}};
    cfg.tol = 1e-6;
    auto [reps, sum] = run_grid(cfg);
    CHECK(sum.points == 9);
    CHECK(sum.passed == 9);
    CHECK(sum.pass_rate == 1.0);

    // singular point is skipped with a witness, not failed
    GridConfig cfg2 = cfg;
    cfg2.axes.clear();
    cfg2.extra_points = {{cplx(0.5), cplx(0.5), cplx(0.5)}, {cplx(3), cplx(-0.5), cplx(4)}};
    auto [reps2, sum2] = run_grid(cfg2);
    CHECK(sum2.skipped == 1);
    CHECK(sum2.passed == 1);
    CHECK(sum2.failed == 0);
    CHECK(reps2[0].skipped);
    CHECK(reps2[0].skip_reason.find("singular") != std::string::npos);

    // empty grid
    GridConfig cfg3 = cfg;
    cfg3.axes.clear();
    auto [reps3, sum3] = run_grid(cfg3);
    CHECK(sum3.points == 0);
    CHECK(reps3.empty());
}

TEST_CASE("grid runs are reproducible bit for bit") {
    GridConfig cfg;
    cfg.identity = "lemma34_1";
    cfg.r = 2;
    cfg.coeff_labels = {"ones", "ones"};
    cfg.axes = {{2.9, 3.1, 0.1}, {-0.5, -0.5, 1.0}, {4.0, 4.0, 1.0}};
    cfg.tol = 1e-6;
    auto [r1, s1] = run_grid(cfg);
    auto [r2, s2] = run_grid(cfg);
    REQUIRE(r1.size() == r2.size());
    for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(json_to_string(report_to_json(r1[i])) == json_to_string(report_to_json(r2[i])));
    }
}

TEST_CASE("halving the tolerance does not inflate residuals") {
    MtPoint p(2, {cplx(3), cplx(-0.5), cplx(4)});
    auto a = check_thm_21(p, ones_list(2), 1e-5);
    auto b = check_thm_21(p, ones_list(2), 5e-6);
    CHECK(b.abs_residual <= a.abs_residual + a.tol);
}
