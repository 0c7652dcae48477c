#include "mtds/verify.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "mtds/errors.hpp"
#include "mtds/gamma.hpp"
#include "mtds/psi.hpp"
#include "mtds/zeta.hpp"

namespace mtds {

namespace {

cplx phase_half_pi(cplx w) { // e^{i pi w / 2}
    return std::exp(cplx(0.0, PI / 2.0) * w);
}

FEReport finish_report(std::string identity, std::vector<cplx> point, std::string labels,
                       cplx lhs, cplx rhs, double tol, ojson params) {
    FEReport rep;
    rep.identity = std::move(identity);
    rep.point = std::move(point);
    rep.labels = std::move(labels);
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.tol = tol;
    rep.abs_residual = std::abs(lhs - rhs);
    rep.rel_residual = rep.abs_residual / std::max({std::abs(lhs), std::abs(rhs), 1e-30});
    rep.pass = rep.rel_residual <= tol;
    rep.params = std::move(params);
    return rep;
}

std::string labels_of(const std::vector<CoefficientSequence>& coeffs) {
    std::string s;
    for (size_t i = 0; i < coeffs.size(); ++i) {
        if (i) s += ",";
        s += coeffs[i].label;
    }
    return s;
}

void guard_locus(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, double band) {
    SingularLocusSpec spec = locus_spec_for(p, coeffs, band);
    LocusHit hit = singular_locus(spec, p);
    if (hit.on) fail(ErrKind::pole, "point inside the singular-locus band: " + hit.witness);
}

// e^{i pi (w+kappa)/2} F_x^+ + e^{-i pi (w+kappa)/2} F_x^-, with F by the
// direct Psi-series where admissible, else by the continuation expansion.
cplx f_combo(double x, const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, cplx w,
             int kappa, double tol_abs, ojson& params) {
    cplx ph = phase_half_pi(w + double(kappa));
    bool direct = f_series_admissible(p, coeffs);
    cplx fp, fm;
    if (direct) {
        FSeriesResult rp = f_series(x, p, coeffs, +1, tol_abs);
        FSeriesResult rm = f_series(x, p, coeffs, -1, tol_abs);
        fp = rp.value;
        fm = rm.value;
        params["f_route"] = "direct";
        params["f_caps"] = rp.trunc.caps;
        params["f_tail_bound"] = std::max(rp.trunc.tail_bound, rm.trunc.tail_bound);
        params["f_terms"] = rp.trunc.terms_used + rm.trunc.terms_used;
    } else {
        int N = f_continued_min_n(p, coeffs);
        fp = f_series_continued(x, p, coeffs, +1, N, tol_abs);
        fm = f_series_continued(x, p, coeffs, -1, N, tol_abs);
        params["f_route"] = "continued";
        params["f_N"] = N;
    }
    return ph * fp + fm / ph;
}

double scale_estimate(cplx v) { return std::max(std::abs(v), 1e-3); }

} // namespace

LocusHit singular_locus(const SingularLocusSpec& spec, const MtPoint& p) {
    LocusHit hit;
    if (spec.band <= 0.0) fail(ErrKind::invalid, "singular_locus: band must be positive");
    const int r = spec.r;
    if (p.r != r || p.s.size() != size_t(r) + 1)
        fail(ErrKind::invalid, "singular_locus: point/spec depth mismatch");
    const int k = int(spec.principal_indices.size());
    if (k == 0) return hit; // all twists non-principal: entire
    const cplx s_last = p.s[size_t(r)];

    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        int h = 0;
        cplx acc = s_last;
        for (int i = 0; i < k; ++i)
            if (mask & (1u << i)) {
                ++h;
                acc += p.s[size_t(spec.principal_indices[size_t(i)] - 1)];
            }
        const int floor_hr = h / r; // [h/r], h <= r
        // value = h - l (1 - [h/r]), l = 0, 1, 2, ...
        if (floor_hr == 1) {
            if (std::abs(acc - double(h)) < spec.band) {
                hit.on = true;
                hit.witness = "sum over all slots + s_{r+1} = " + std::to_string(h);
                return hit;
            }
            continue;
        }
        long long lmax = (long long)std::ceil(std::abs(acc) + double(h) + 2.0);
        for (long long l = 0; l <= lmax; ++l) {
            double v = double(h) - double(l);
            if (std::abs(acc - v) < spec.band) {
                hit.on = true;
                std::string subset;
                for (int i = 0; i < k; ++i)
                    if (mask & (1u << i)) {
                        if (!subset.empty()) subset += "+";
                        subset += "s_" + std::to_string(spec.principal_indices[size_t(i)]);
                    }
                hit.witness = subset + "+s_" + std::to_string(r + 1) + " = " +
                              std::to_string(int(v)) + " (h=" + std::to_string(h) +
                              ", l=" + std::to_string(l) + ")";
                return hit;
            }
        }
    }
    return hit;
}

SingularLocusSpec locus_spec_for(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                                 double band) {
    SingularLocusSpec spec;
    spec.r = p.r;
    spec.band = band;
    for (int j = 0; j < p.r; ++j)
        if (coeffs[size_t(j)].principal_like) spec.principal_indices.push_back(j + 1);
    return spec;
}

FEReport check_lemma_34_1(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                          double tol) {
    if (p.r < 2) fail(ErrKind::invalid, "check_lemma_34_1: depth r >= 2 required");
    if (coeffs.back().kind != CoefficientSequence::Kind::ones)
        fail(ErrKind::hypothesis, "check_lemma_34_1: last coefficient slot must be ones");
    std::vector<double> alphas;
    for (auto& c : coeffs) alphas.push_back(c.alpha);
    RegionCheck rc = in_convergence_region(p, alphas);
    if (rc.worst_margin < 0.2)
        fail(ErrKind::hypothesis, "check_lemma_34_1: point outside the absolute-convergence "
                                  "region (margin " + std::to_string(rc.worst_margin) + ")");
    const int r = p.r;
    const cplx sr = p.s[size_t(r - 1)], sr1 = p.s[size_t(r)];
    if (!(sr.real() < coeffs[size_t(r - 1)].alpha))
        fail(ErrKind::hypothesis, "check_lemma_34_1: needs Re s_r < alpha_r");
    if (!(sr1.real() > 0.0)) fail(ErrKind::hypothesis, "check_lemma_34_1: needs Re s_{r+1} > 0");
    guard_locus(p, coeffs, 1e-3);

    ojson params = ojson::object();
    MtResult coarse = mt_direct(p, coeffs, 1e-4);
    double scale = scale_estimate(coarse.value);
    double tol_abs = tol * scale / 8.0;

    MtResult lhs = mt_direct(p, coeffs, tol_abs);
    params["lhs_route"] = "direct";
    params["lhs_caps"] = lhs.trunc.caps;
    params["lhs_tail_bound"] = lhs.trunc.tail_bound;
    params["lhs_terms"] = lhs.trunc.terms_used;

    cplx w = sr + sr1 - 1.0;
    cplx ratio = gamma_ratio({1.0 - sr, w}, {sr1});
    MtPoint q;
    q.r = r - 1;
    q.s.assign(p.s.begin(), p.s.begin() + (r - 1));
    q.s.push_back(w + 0.0);
    std::vector<CoefficientSequence> inner(coeffs.begin(), coeffs.end() - 1);
    cplx depth_term = ratio * mt_eval_auto(q, inner, tol_abs / std::max(1.0, std::abs(ratio)));

    cplx pref = pow_pos(TWO_PI, w) * gamma_fn(1.0 - sr);
    cplx combo = f_combo(1.0, p, coeffs, w, 0, tol_abs / std::max(1.0, 2.0 * std::abs(pref)),
                         params);
    cplx rhs = depth_term + pref * combo;
    return finish_report("lemma34_1", p.s, labels_of(coeffs), lhs.value, rhs, tol,
                         std::move(params));
}

FEReport check_thm_21(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                      double tol) {
    if (p.r < 2) fail(ErrKind::invalid, "check_thm_21: depth r >= 2 required");
    if (coeffs.back().kind != CoefficientSequence::Kind::ones)
        fail(ErrKind::hypothesis, "check_thm_21: last coefficient slot must be ones");
    const int r = p.r;
    const cplx sr = p.s[size_t(r - 1)], sr1 = p.s[size_t(r)];
    guard_locus(p, coeffs, 1e-3);
    if (near_gamma_pole(1.0 - sr, 1e-6))
        fail(ErrKind::pole, "check_thm_21: Gamma(1-s_r) pole");

    ojson params = ojson::object();
    cplx lhs_coarse = big_g_modified(p, coeffs, 1e-4);
    double scale = scale_estimate(lhs_coarse);
    double tol_abs = tol * scale / 8.0;

    cplx lhs = big_g_modified(p, coeffs, tol_abs);
    params["lhs_route"] = "modified (direct/continued mt)";

    cplx w = sr + sr1 - 1.0;
    cplx pref = pow_pos(TWO_PI, w) * gamma_fn(1.0 - sr);
    cplx combo =
        f_combo(1.0, p, coeffs, w, 0, tol_abs / std::max(1.0, 2.0 * std::abs(pref)), params);
    cplx rhs = pref * combo;
    return finish_report("thm21", p.s, labels_of(coeffs), lhs, rhs, tol, std::move(params));
}

FEReport check_thm_22(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                      double tol) {
    if (p.r < 2) fail(ErrKind::invalid, "check_thm_22: depth r >= 2 required");
    const CoefficientSequence& last = coeffs.back();
    if (last.kind != CoefficientSequence::Kind::character || last.chi->q <= 1 ||
        !last.chi->primitive)
        fail(ErrKind::hypothesis,
             "check_thm_22: last slot must carry a primitive character mod q > 1");
    const int r = p.r;
    const cplx sr = p.s[size_t(r - 1)], sr1 = p.s[size_t(r)];
    guard_locus(p, coeffs, 1e-3);
    if (near_gamma_pole(1.0 - sr, 1e-6))
        fail(ErrKind::pole, "check_thm_22: Gamma(1-s_r) pole");

    ojson params = ojson::object();
    MtResult coarse = mt_direct(p, coeffs, 1e-4);
    double scale = scale_estimate(coarse.value);
    double tol_abs = tol * scale / 8.0;

    MtResult lhs = mt_direct(p, coeffs, tol_abs);
    params["lhs_caps"] = lhs.trunc.caps;
    params["lhs_tail_bound"] = lhs.trunc.tail_bound;
    params["lhs_terms"] = lhs.trunc.terms_used;

    const DirichletCharacter& chi = *last.chi;
    const int q = chi.q;
    RootNumber rn = gauss_sum(chi);
    cplx w = sr + sr1 - 1.0;
    cplx pref = std::pow(double(q), -0.5) * rn.epsilon * pow_pos(TWO_PI / q, w) *
                gamma_fn(1.0 - sr);

    std::vector<CoefficientSequence> fcoeffs(coeffs.begin(), coeffs.end() - 1);
    fcoeffs.push_back(coeff_conjugate(last));
    cplx combo = f_combo(double(q), p, fcoeffs, w, chi.kappa,
                         tol_abs / std::max(1.0, 2.0 * std::abs(pref)), params);
    params["epsilon"] = cplx_to_string(rn.epsilon);
    params["kappa"] = chi.kappa;
    cplx rhs = pref * combo;
    return finish_report("thm22", p.s, labels_of(coeffs), lhs.value, rhs, tol, std::move(params));
}

FEReport check_thm_12(const MtPoint& p, double tol) {
    if (p.r < 2) fail(ErrKind::invalid, "check_thm_12: depth r >= 2 required");
    const int r = p.r;
    std::vector<CoefficientSequence> ones(size_t(r), coeff_ones());
    const cplx sr = p.s[size_t(r - 1)], sr1 = p.s[size_t(r)];
    cplx w = sr + sr1 - 1.0;

    // reflected argument (-s_1, ..., -s_{r-1}, 1 - s_{r+1}, 1 - s_r)
    MtPoint pr;
    pr.r = r;
    for (int j = 0; j < r - 1; ++j) pr.s.push_back(-p.s[size_t(j)]);
    pr.s.push_back(1.0 - sr1);
    pr.s.push_back(1.0 - sr);

    guard_locus(p, ones, 1e-3);
    guard_locus(pr, ones, 1e-3);
    if (near_gamma_pole(sr1, 1e-6) || near_gamma_pole(1.0 - sr, 1e-6))
        fail(ErrKind::pole, "check_thm_12: Gamma factor at a pole");

    ojson params = ojson::object();
    cplx g_here_coarse = g_modified(p, 1e-4);
    double scale = scale_estimate(g_here_coarse);
    double tol_abs = tol * scale / 10.0;

    cplx g_here = g_modified(p, tol_abs);
    cplx g_refl = g_modified(pr, tol_abs);
    params["g_routes"] = "g(p) direct; g(p') continued";

    // F^{+-}(p)
    cplx fp, fm;
    if (f_series_admissible(p, ones)) {
        fp = f_series(1.0, p, ones, +1, tol_abs).value;
        fm = f_series(1.0, p, ones, -1, tol_abs).value;
        params["f_route"] = "direct";
    } else {
        int N = f_continued_min_n(p, ones);
        fp = f_series_continued(1.0, p, ones, +1, N, tol_abs);
        fm = f_series_continued(1.0, p, ones, -1, N, tol_abs);
        params["f_route"] = "continued";
    }

    // sigma_MT-weighted Psi series: direct where convergent, otherwise through
    // the reflected F-series (continuation route).
    cplx S;
    bool direct_S = true;
    {
        // direct convergence: per-index exponents of sigma_MT(l)*D^{-Re s_{r+1}}
        double q_exp = sr1.real() - w.real();
        for (int j = 0; j < r - 1 && direct_S; ++j)
            if (!(q_exp / double(r - 1) - p.s[size_t(j)].real() > 1.1)) direct_S = false;
    }
    if (direct_S) {
        std::vector<cplx> svals(p.s.begin(), p.s.begin() + (r - 1));
        svals.push_back(w);
        cplx acc = 0.0;
        long long L = 24;
        cplx prev = 0.0;
        for (int pass = 0; pass < 6; ++pass, L *= 2) {
            acc = 0.0;
            std::vector<long long> l(size_t(r - 1), 1);
            while (true) {
                long long D = 0;
                for (long long v : l) D += v;
                cplx sig = sigma_mt(svals, l);
                BranchedBase bp = BranchedBase::imag_axis(TWO_PI * double(D), +1);
                BranchedBase bm = BranchedBase::imag_axis(TWO_PI * double(D), -1);
                acc += sig * (psi(sr1, sr + sr1, bp, 1e-11).value +
                              psi(sr1, sr + sr1, bm, 1e-11).value);
                int j = 0;
                while (j < r - 1 && ++l[size_t(j)] > L) {
                    l[size_t(j)] = 1;
                    ++j;
                }
                if (j == r - 1) break;
            }
            if (pass > 0 && std::abs(acc - prev) < tol_abs * 0.5) break;
            prev = acc;
        }
        S = acc;
        params["S_route"] = "direct sigma_mt sum";
    } else {
        cplx fpr, fmr;
        if (f_series_admissible(pr, ones)) {
            fpr = f_series(1.0, pr, ones, +1, tol_abs).value;
            fmr = f_series(1.0, pr, ones, -1, tol_abs).value;
        } else {
            int N = f_continued_min_n(pr, ones);
            fpr = f_series_continued(1.0, pr, ones, +1, N, tol_abs);
            fmr = f_series_continued(1.0, pr, ones, -1, N, tol_abs);
        }
        cplx ph = phase_half_pi(w);
        S = pow_pos(TWO_PI, -w) * (fpr / ph + ph * fmr);
        params["S_route"] = "reflected F (continued)";
    }

    cplx ph = phase_half_pi(w);
    cplx lhs = g_refl / (ph * gamma_fn(sr1)) + ph * fp + fm / ph;
    cplx rhs = g_here / (pow_pos(TWO_PI, w) * gamma_fn(1.0 - sr)) + S / ph;
    return finish_report("thm12", p.s, labels_of(ones), lhs, rhs, tol, std::move(params));
}

FEReport check_cm(cplx s1, cplx s2, const CoefficientSequence& A, double tol) {
    MtPoint p;
    p.r = 2;
    p.s = {cplx(0.0), s1, s2};
    std::vector<CoefficientSequence> coeffs{A, coeff_ones()};
    guard_locus(p, coeffs, 1e-3);
    if (near_gamma_pole(1.0 - s1, 1e-6) || near_gamma_pole(s1 + s2 - 1.0, 1e-6))
        fail(ErrKind::pole, "check_cm: Gamma factor at a pole");

    ojson params = ojson::object();
    MtResult coarse = mt_direct(p, coeffs, 1e-4);
    double scale = scale_estimate(coarse.value);
    double tol_abs = tol * scale / 8.0;

    MtResult lhs = mt_direct(p, coeffs, tol_abs); // L_2(s1, s2; A)
    params["lhs_caps"] = lhs.trunc.caps;
    params["lhs_terms"] = lhs.trunc.terms_used;

    cplx w = s1 + s2 - 1.0;
    cplx ratio = gamma_ratio({1.0 - s1, w}, {s2});
    cplx first = ratio * A.l_eval(w);
    cplx pref = pow_pos(TWO_PI, w) * gamma_fn(1.0 - s1);
    cplx combo =
        f_combo(1.0, p, coeffs, w, 0, tol_abs / std::max(1.0, 2.0 * std::abs(pref)), params);
    cplx rhs = first + pref * combo;
    return finish_report("cm", {s1, s2}, A.label, lhs.value, rhs, tol, std::move(params));
}

FEReport check_kmt(cplx s1, int q, int chi1_index, int chi2_index, int k, double tol,
                   int requested_parity) {
    DirichletCharacter chi1 = character(q, chi1_index);
    DirichletCharacter chi2 = character(q, chi2_index);
    if (q <= 1 || !chi1.primitive || !chi2.primitive)
        fail(ErrKind::hypothesis, "check_kmt: both characters must be primitive mod q > 1");
    const int parity = (chi1.kappa == chi2.kappa) ? 1 : 0; // 1: odd plane 2k+1
    if (requested_parity >= 0 && requested_parity != parity)
        fail(ErrKind::hypothesis,
             std::string("check_kmt: parity mismatch: chi1(-1)chi2(-1) = ") +
                 (parity == 1 ? "+1 needs the odd hyperplane s1+s2 = 2k+1"
                              : "-1 needs the even hyperplane s1+s2 = 2k"));
    const double plane = parity == 1 ? double(2 * k + 1) : double(2 * k);
    cplx s2 = plane - s1;

    ojson params = ojson::object();
    params["plane"] = plane;
    params["parity"] = parity == 1 ? "odd" : "even";

    auto L2 = [&](cplx sa, cplx sb, const DirichletCharacter& c1, const DirichletCharacter& c2,
                  double tl) -> cplx {
        // L_2(sa, sb; c1, c2) = MT_2(0, sa, sb; c2, c1)
        MtPoint p;
        p.r = 2;
        p.s = {cplx(0.0), sa, sb};
        std::vector<CoefficientSequence> cs{coeff_character(c2), coeff_character(c1)};
        return mt_eval_auto(p, cs, tl);
    };

    cplx lhs_coarse = L2(s1, s2, chi1, chi2, 1e-4);
    double scale = scale_estimate(lhs_coarse);
    double tol_abs = tol * scale / 8.0;

    DirichletCharacter chi1b = conjugate_character(chi1);
    DirichletCharacter chi2b = conjugate_character(chi2);
    BranchedBase base = BranchedBase::imag_axis(TWO_PI / double(q), +1); // 2 pi i / q

    cplx lhs = principal_power(base, (1.0 - s1 - s2) / 2.0) * gamma_fn(s2) /
               gauss_sum(chi1).tau * L2(s1, s2, chi1, chi2, tol_abs);
    cplx rhs = principal_power(base, (s1 + s2 - 1.0) / 2.0) * gamma_fn(1.0 - s1) /
               gauss_sum(chi2b).tau * L2(1.0 - s2, 1.0 - s1, chi2b, chi1b, tol_abs);

    std::string labels = "char:" + std::to_string(q) + ":" + std::to_string(chi1_index) + "," +
                         "char:" + std::to_string(q) + ":" + std::to_string(chi2_index) +
                         ",k=" + std::to_string(k);
    return finish_report("kmt", {s1, s2}, labels, lhs, rhs, tol, std::move(params));
}

std::vector<std::vector<cplx>> expand_grid(const GridConfig& cfg) {
    std::vector<std::vector<cplx>> pts;
    if (!cfg.axes.empty()) {
        std::vector<std::vector<double>> axes;
        for (auto& ax : cfg.axes) {
            std::vector<double> vals;
            if (ax.step <= 0.0) fail(ErrKind::config, "grid axis step must be positive");
            for (double v = ax.start; v <= ax.stop + 1e-12; v += ax.step) vals.push_back(v);
            axes.push_back(std::move(vals));
        }
        bool any_empty = false;
        for (auto& a : axes)
            if (a.empty()) any_empty = true;
        if (!any_empty) {
            std::vector<size_t> idx(axes.size(), 0);
            while (true) {
                std::vector<cplx> pt;
                for (size_t j = 0; j < axes.size(); ++j) pt.push_back(cplx(axes[j][idx[j]], 0.0));
                pts.push_back(std::move(pt));
                size_t j = 0;
                while (j < axes.size() && ++idx[j] == axes[j].size()) {
                    idx[j] = 0;
                    ++j;
                }
                if (j == axes.size()) break;
            }
        }
    }
    for (auto& pt : cfg.extra_points) pts.push_back(pt);
    return pts;
}

namespace {

FEReport run_one(const GridConfig& cfg, const std::vector<cplx>& pt) {
    auto need = [&](size_t n) {
        if (pt.size() != n)
            fail(ErrKind::config, "grid point has " + std::to_string(pt.size()) +
                                      " components, expected " + std::to_string(n));
    };
    try {
        if (cfg.identity == "kmt") {
            need(1);
            return check_kmt(pt[0], cfg.kmt_q, cfg.kmt_chi1, cfg.kmt_chi2, cfg.kmt_k, cfg.tol);
        }
        if (cfg.identity == "cm") {
            need(2);
            auto coeffs = parse_coeff_list(cfg.coeff_labels.empty() ? "ones"
                                                                    : cfg.coeff_labels[0],
                                           1);
            return check_cm(pt[0], pt[1], coeffs[0], cfg.tol);
        }
        MtPoint p;
        p.r = cfg.r;
        p.s = pt;
        need(size_t(cfg.r) + 1);
        if (cfg.identity == "thm12") return check_thm_12(p, cfg.tol);
        std::string joined;
        for (size_t i = 0; i < cfg.coeff_labels.size(); ++i)
            joined += (i ? "," : "") + cfg.coeff_labels[i];
        auto coeffs = parse_coeff_list(joined, cfg.r);
        if (cfg.identity == "lemma34_1") return check_lemma_34_1(p, coeffs, cfg.tol);
        if (cfg.identity == "thm21") return check_thm_21(p, coeffs, cfg.tol);
        if (cfg.identity == "thm22") return check_thm_22(p, coeffs, cfg.tol);
        fail(ErrKind::config, "unknown identity: " + cfg.identity);
    } catch (const Error& e) {
        if (e.kind == ErrKind::config) throw;
        FEReport rep;
        rep.identity = cfg.identity;
        rep.point = pt;
        rep.tol = cfg.tol;
        rep.skipped = true;
        rep.skip_reason = e.what();
        rep.params = ojson::object();
        return rep;
    }
}

} // namespace

std::pair<std::vector<FEReport>, GridSummary> run_grid(const GridConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    auto pts = expand_grid(cfg);
    std::vector<FEReport> reps(pts.size());

    int nthreads = cfg.threads;
    if (nthreads <= 0) {
        if (const char* env = std::getenv("MTDS_THREADS")) nthreads = std::atoi(env);
        if (nthreads <= 0) nthreads = int(std::thread::hardware_concurrency());
        if (nthreads <= 0) nthreads = 1;
    }
    nthreads = std::min(nthreads, int(std::max<std::size_t>(pts.size(), 1)));

    if (nthreads <= 1 || pts.size() <= 1) {
        for (size_t i = 0; i < pts.size(); ++i) reps[i] = run_one(cfg, pts[i]);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(static_cast<size_t>(nthreads));
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (size_t i = next.fetch_add(1); i < pts.size(); i = next.fetch_add(1))
                        reps[i] = run_one(cfg, pts[i]);
                } catch (...) {
                    errs[size_t(t)] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }

    GridSummary sum;
    sum.points = (long long)reps.size();
    for (auto& r : reps) {
        if (r.skipped)
            ++sum.skipped;
        else if (r.pass) {
            ++sum.passed;
            sum.max_rel_residual = std::max(sum.max_rel_residual, r.rel_residual);
        } else {
            ++sum.failed;
            sum.max_rel_residual = std::max(sum.max_rel_residual, r.rel_residual);
        }
    }
    long long active = sum.passed + sum.failed;
    sum.pass_rate = active == 0 ? 1.0 : double(sum.passed) / double(active);
    sum.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return {std::move(reps), sum};
}

ojson report_to_json(const FEReport& rep) {
    ojson j = ojson::object();
    ojson s = ojson::array();
    for (auto& z : rep.point) s.push_back(cplx_to_string(z));
    j["s"] = std::move(s);
    j["labels"] = rep.labels;
    if (rep.skipped) {
        j["verdict"] = "skip";
        j["skip_reason"] = rep.skip_reason;
        return j;
    }
    j["lhs"] = cplx_to_string(rep.lhs);
    j["rhs"] = cplx_to_string(rep.rhs);
    j["abs_residual"] = rep.abs_residual;
    j["rel_residual"] = rep.rel_residual;
    j["params"] = rep.params;
    j["verdict"] = rep.pass ? "pass" : "fail";
    return j;
}

ojson grid_report_json(const GridConfig& cfg, const std::vector<FEReport>& reps,
                       const GridSummary& sum) {
    ojson j = ojson::object();
    j["identity"] = cfg.identity;
    ojson echo = ojson::object();
    echo["r"] = cfg.r;
    {
        std::string joined;
        for (size_t i = 0; i < cfg.coeff_labels.size(); ++i)
            joined += (i ? "," : "") + cfg.coeff_labels[i];
        echo["coeffs"] = joined;
    }
    echo["tol"] = cfg.tol;
    if (cfg.identity == "kmt") {
        echo["q"] = cfg.kmt_q;
        echo["chi1"] = cfg.kmt_chi1;
        echo["chi2"] = cfg.kmt_chi2;
        echo["k"] = cfg.kmt_k;
    }
    j["config_echo"] = std::move(echo);
    ojson pts = ojson::array();
    for (auto& r : reps) pts.push_back(report_to_json(r));
    j["points"] = std::move(pts);
    ojson s = ojson::object();
    s["points"] = sum.points;
    s["passed"] = sum.passed;
    s["failed"] = sum.failed;
    s["skipped"] = sum.skipped;
    s["pass_rate"] = sum.pass_rate;
    s["max_rel_residual"] = sum.max_rel_residual;
    s["wall_ms"] = sum.wall_ms;
    j["summary"] = std::move(s);
    return j;
}

} // namespace mtds
