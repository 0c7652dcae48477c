#include "mtds/mt_series.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>

#include "mtds/errors.hpp"
#include "mtds/gamma.hpp"
#include "mtds/kernels.hpp"
#include "mtds/psi.hpp"
#include "mtds/zeta.hpp"

namespace mtds {

namespace {

// ----------------------------------------------------------------------
// shared small helpers

thread_local std::vector<double> t_logs; // t_logs[n] = log n

const double* log_table(long long upto) {
    if ((long long)t_logs.size() <= upto) {
        size_t old = t_logs.size();
        size_t ns = std::max<size_t>(1024, std::bit_ceil(size_t(upto) + 1));
        t_logs.resize(ns);
        size_t start = old == 0 ? 1 : old;
        if (old == 0) t_logs[0] = 0.0;
        for (size_t n = start; n < ns; ++n) t_logs[n] = std::log(double(n));
    }
    return t_logs.data();
}

// sum_{m>L} m^{-delta} <= L^{1-delta}/(delta-1)
double tailsum(double delta, double L) {
    if (delta <= 1.0) return std::numeric_limits<double>::infinity();
    return std::pow(std::max(L, 1.0), 1.0 - delta) / (delta - 1.0);
}

// sum_{m>L} (log m) m^{-delta}
double tailsum_log(double delta, double L) {
    if (delta <= 1.0) return std::numeric_limits<double>::infinity();
    double Lm = std::max(L, 1.0);
    return std::pow(Lm, 1.0 - delta) *
           (std::log(Lm) / (delta - 1.0) + 1.0 / ((delta - 1.0) * (delta - 1.0)));
}

// sum_{m>=1} m^{-delta} <= 1 + 1/(delta-1)
double zbar(double delta) {
    if (delta <= 1.0) return std::numeric_limits<double>::infinity();
    return 1.0 + 1.0 / (delta - 1.0);
}

struct WeightBuf {
    std::vector<double> re, im;
    bool trivial = false;   // all ones
    bool real_only = false; // im empty
};

void fill_weights(const CoefficientSequence& a, long long count, WeightBuf& w) {
    if (a.kind == CoefficientSequence::Kind::ones) {
        w.trivial = true;
        return;
    }
    w.re.resize(size_t(count));
    bool any_im = false;
    std::vector<double> im(static_cast<size_t>(count));
    for (long long n = 1; n <= count; ++n) {
        cplx v = a.value(n);
        w.re[size_t(n - 1)] = v.real();
        im[size_t(n - 1)] = v.imag();
        if (v.imag() != 0.0) any_im = true;
    }
    if (any_im) {
        w.im = std::move(im);
        w.real_only = false;
    } else {
        w.im.clear();
        w.real_only = true;
    }
}

// sum_{n=1}^{L} a(n) n^{-u}
cplx lpartial(const CoefficientSequence& a, cplx u, long long L, long long& terms) {
    WeightBuf w;
    fill_weights(a, L, w);
    kern::Terms t;
    t.log_a = log_table(L) + 1;
    t.n = size_t(L);
    if (!w.trivial) {
        t.w_re = w.re.data();
        t.w_im = w.im.empty() ? nullptr : w.im.data();
    }
    terms += L;
    return kern::pow_sum(u, 0.0, t);
}

double pole_distance(const CoefficientSequence& a, cplx u) {
    double d = 1e300;
    for (auto& [p, res] : a.poles()) d = std::min(d, std::abs(u - p));
    return d;
}

// sum_{m>L} a(m) m^{-u}, cancellation-free (shifted Hurwitz evaluation per
// residue class rather than l_eval minus a partial sum).
cplx ltail(const CoefficientSequence& a, cplx u, long long L, long long& terms) {
    if (pole_distance(a, u) < 1e-8)
        fail(ErrKind::pole, "series tail completion hits a pole of L[" + a.label + "] at s = " +
                                cplx_to_string(u));
    using Kind = CoefficientSequence::Kind;
    switch (a.kind) {
        case Kind::ones:
            return hurwitz_zeta_any(u, double(L) + 1.0);
        case Kind::monomial:
            return hurwitz_zeta_any(u - a.beta, double(L) + 1.0);
        case Kind::character: {
            const int q = a.chi->q;
            if (q == 1) return hurwitz_zeta_any(u, double(L) + 1.0);
            cplx acc = 0.0;
            for (int j = 1; j <= q; ++j) {
                cplx c = (*a.chi)(j);
                if (c == cplx(0.0)) continue;
                // m = q t + j > L  <=>  t >= floor((L - j)/q) + 1
                long long t0 = (L - j >= 0) ? (L - j) / q + 1 : 0;
                acc += c * hurwitz_zeta_any(u, double(t0) + double(j) / double(q));
            }
            return std::exp(-u * std::log(double(q))) * acc;
        }
        case Kind::finite: {
            cplx acc = 0.0;
            for (long long m = L + 1; m <= (long long)a.finite_vals.size(); ++m)
                if (a.finite_vals[size_t(m - 1)] != cplx(0.0))
                    acc += a.finite_vals[size_t(m - 1)] * std::exp(-u * std::log(double(m)));
            return acc;
        }
        case Kind::custom:
            // subtraction route; loses accuracy once the tail is far below |L(u)|
            return a.l_eval(u) - lpartial(a, u, L, terms);
    }
    return 0.0;
}

// sum_{n>L} a(n) log(n) n^{-u} = -L'(u) - sum_{n<=L} a(n) log(n) n^{-u}
cplx ltail_log(const CoefficientSequence& a, cplx u, long long L, long long& terms) {
    if (pole_distance(a, u) < 1e-8)
        fail(ErrKind::pole, "log-weighted tail hits a pole of L[" + a.label + "]");
    WeightBuf w;
    fill_weights(a, L, w);
    const double* lg = log_table(L);
    std::vector<double> wre(static_cast<size_t>(L));
    std::vector<double> wim;
    bool has_im = !w.trivial && !w.im.empty();
    if (has_im) wim.resize(size_t(L));
    for (long long n = 1; n <= L; ++n) {
        double l = lg[n];
        wre[size_t(n - 1)] = l * (w.trivial ? 1.0 : w.re[size_t(n - 1)]);
        if (has_im) wim[size_t(n - 1)] = l * w.im[size_t(n - 1)];
    }
    kern::Terms t;
    t.log_a = lg + 1;
    t.n = size_t(L);
    t.w_re = wre.data();
    t.w_im = has_im ? wim.data() : nullptr;
    terms += L;
    cplx partial_log = kern::pow_sum(u, 0.0, t);
    return -a.l_eval_ds(u) - partial_log;
}

// ----------------------------------------------------------------------
// innermost-index completion:
//   S(P) = sum_{m>=1} a(m) m^{-sr} (P+m)^{-sr1}
// head over m <= L (L >= 2P), tail through binomial expansion in P/m:
//   sum_{m>L} = sum_t binom(-sr1, t) P^t LTAIL(sr+sr1+t, L)

class InnerCompleter {
public:
    InnerCompleter(const CoefficientSequence& a, cplx sr, cplx sr1, double tol_term,
                   long long& terms, long long max_terms)
        : a_(a), sr_(sr), sr1_(sr1), tol_term_(tol_term), terms_(terms),
          max_terms_(max_terms) {
        finite_ = (a.kind == CoefficientSequence::Kind::finite);
    }

    cplx eval(long long P, double& err) {
        if (finite_) {
            cplx acc = 0.0;
            for (long long m = 1; m <= (long long)a_.finite_vals.size(); ++m) {
                cplx c = a_.finite_vals[size_t(m - 1)];
                if (c == cplx(0.0)) continue;
                acc += c * std::exp(-sr_ * std::log(double(m)) -
                                    sr1_ * std::log(double(P + m)));
            }
            err += 1e-15 * std::abs(acc);
            return acc;
        }
        int k = 0;
        while ((BASE << k) < 3 * P) ++k;
        const long long L = BASE << k;
        ClassData& cd = ensure_class(k);

        kern::Terms t;
        t.log_a = log_table(P + L) + 1;
        t.log_b = log_table(P + L) + 1 + P;
        t.n = size_t(L);
        if (!cd.w.trivial) {
            t.w_re = cd.w.re.data();
            t.w_im = cd.w.im.empty() ? nullptr : cd.w.im.data();
        }
        terms_ += L;
        if (terms_ > max_terms_)
            fail(ErrKind::budget, "mt_direct: term budget exhausted in the inner sums");
        cplx acc = kern::pow_sum(sr_, sr1_, t);

        // binomial tail: b_t = binom(-sr1, t), ratio |P/L| <= 1/2
        cplx bt = 1.0;
        cplx Pt = 1.0;
        const double lnP = std::log(double(P));
        double mag = std::abs(acc);
        int calm = 0;
        for (int t_i = 0;; ++t_i) {
            cplx term = bt * Pt * class_ltail(cd, k, t_i);
            acc += term;
            mag = std::max(mag, std::abs(acc));
            double at = std::abs(term);
            if (at < std::max(tol_term_ * 0.05, 1e-17 * mag)) {
                if (++calm >= 3) {
                    err += at * 3.0 + 5e-16 * mag;
                    break;
                }
            } else {
                calm = 0;
            }
            if (t_i >= 74)
                fail(ErrKind::nonconvergence, "mt_direct: inner binomial tail stalled");
            bt *= (-sr1_ - double(t_i)) / double(t_i + 1);
            Pt *= std::exp(lnP); // P^t, exact growth
        }
        return acc;
    }

private:
    static constexpr long long BASE = 64;
    struct ClassData {
        WeightBuf w;
        std::vector<cplx> lt;
        std::vector<char> lt_ok;
    };

    ClassData& ensure_class(int k) {
        if (k >= (int)classes_.size()) classes_.resize(size_t(k) + 1);
        ClassData& cd = classes_[size_t(k)];
        if (cd.w.re.empty() && !cd.w.trivial) fill_weights(a_, BASE << k, cd.w);
        return cd;
    }

    cplx class_ltail(ClassData& cd, int k, int t) {
        if (t >= (int)cd.lt.size()) {
            cd.lt.resize(size_t(t) + 8, cplx(0.0));
            cd.lt_ok.resize(size_t(t) + 8, 0);
        }
        if (!cd.lt_ok[size_t(t)]) {
            cd.lt[size_t(t)] = ltail(a_, sr_ + sr1_ + double(t), BASE << k, terms_);
            cd.lt_ok[size_t(t)] = 1;
        }
        return cd.lt[size_t(t)];
    }

    const CoefficientSequence& a_;
    cplx sr_, sr1_;
    double tol_term_;
    long long& terms_;
    long long max_terms_;
    bool finite_ = false;
    std::vector<ClassData> classes_;
};

// ----------------------------------------------------------------------
// large-P expansion of the inner sum (Barnes residues):
//   S(P) ~ sum_n (-1)^n (sr1)_n / n! L(sr - n) P^{-sr1-n}
//        + sum_{poles p0} res0 Gamma(p0-sr)Gamma(sr+sr1-p0)/Gamma(sr1) P^{p0-sr-sr1}
// with psi-digamma merged terms (carrying log P) when sr - p0 is a
// non-negative integer n (double pole).

struct AsymTerm {
    cplx coef;
    cplx expo;
    cplx coef_log = 0.0; // for (coef + coef_log * log P) * P^expo
    bool has_log = false;
};

class InnerAsym {
public:
    bool ok = false;
    std::string why;
    double Pbig = 0.0;
    double e_in = 0.0; // dominant exponent, Re
    std::vector<AsymTerm> terms;
    double rem_coef = 0.0, rem_expo = 0.0;       // remainder estimate coef*P^expo
    double cancel_coef = 0.0, cancel_expo = 0.0; // near-collision fp-cancellation

    InnerAsym(const CoefficientSequence& a, cplx sr, cplx sr1) {
        int K2 = 18;
        auto poles = a.poles();
        for (auto& [p0, r0] : poles) {
            cplx d = sr - p0;
            if (std::abs(d.imag()) < 1e-9 && d.real() > -0.5)
                K2 = std::max(K2, int(std::lround(d.real())) + 4);
        }
        if (K2 > 40) {
            why = "expansion order too large";
            return;
        }
        std::vector<char> merged(poles.size(), 0);
        cplx bn = 1.0; // (-1)^n (sr1)_n / n!
        for (int n = 0; n < K2; ++n) {
            cplx un = sr - double(n);
            int hit = -1;
            for (size_t i = 0; i < poles.size(); ++i)
                if (std::abs(un - poles[i].first) < 0.05) hit = int(i);
            if (hit < 0) {
                double d = pole_distance(a, un);
                if (d < 0.05) {
                    why = "L value too close to a pole";
                    return;
                }
                try {
                    terms.push_back({bn * a.l_eval(un), -sr1 - double(n)});
                } catch (const Error&) {
                    why = "L evaluation failed in expansion";
                    return;
                }
            } else {
                merged[size_t(hit)] = 1;
                cplx p0 = poles[size_t(hit)].first, res0 = poles[size_t(hit)].second;
                cplx eps = un - p0;
                cplx c0;
                try {
                    c0 = a.pole_constant_term(p0);
                } catch (const Error&) {
                    why = "no Laurent data at pole";
                    return;
                }
                if (std::abs(eps) < 1e-7) {
                    // exact merged term: bn [res0 (lnP + psi(n+1) - psi(sr1+n)) + c0] P^{-sr1-n}
                    cplx cst = res0 * (digamma(cplx(double(n + 1))) - digamma(sr1 + double(n))) + c0;
                    AsymTerm t{bn * cst, -sr1 - double(n), bn * res0, true};
                    terms.push_back(t);
                    double cc = std::abs(eps) * 20.0 * std::abs(bn * res0);
                    if (cc > cancel_coef) {
                        cancel_coef = cc;
                        cancel_expo = -(sr1.real()) - double(n);
                    }
                } else {
                    // keep the pair as separate power terms; track the cancellation
                    terms.push_back({bn * a.l_eval(un), -sr1 - double(n)});
                    cplx gfac = res0 *
                                std::exp(log_gamma(p0 - sr) + log_gamma(sr + sr1 - p0) -
                                         log_gamma(sr1));
                    terms.push_back({gfac, p0 - sr - sr1});
                    double cc = 2e-16 / std::abs(eps) * std::abs(bn);
                    if (cc > cancel_coef) {
                        cancel_coef = cc;
                        cancel_expo = (p0 - sr - sr1).real();
                    }
                }
            }
            bn *= -(sr1 + double(n)) / double(n + 1);
        }
        for (size_t i = 0; i < poles.size(); ++i) {
            if (merged[i]) continue;
            cplx p0 = poles[i].first, res0 = poles[i].second;
            cplx z0 = p0 - sr - sr1;
            if (near_gamma_pole(p0 - sr, 1e-7) || near_gamma_pole(sr + sr1 - p0, 1e-7)) {
                why = "Gamma factor at a pole in the residue term";
                return;
            }
            terms.push_back(
                {res0 * std::exp(log_gamma(p0 - sr) + log_gamma(sr + sr1 - p0) - log_gamma(sr1)),
                 z0});
        }
        // remainder scale: next coefficient magnitude
        double lnext = 1.0;
        try {
            cplx u = sr - double(K2);
            if (pole_distance(a, u) > 0.05) lnext = std::abs(a.l_eval(u));
        } catch (...) {
        }
        rem_coef = 3.0 * std::abs(bn) * std::max(lnext, 1.0);
        rem_expo = -(sr1.real()) - double(K2);

        e_in = rem_expo;
        for (auto& t : terms) e_in = std::max(e_in, t.expo.real());
        Pbig = 2.0 * (std::abs(sr1) + double(K2) + 6.0);
        ok = true;
    }

    cplx eval(double P, double& err) const {
        const double lnP = std::log(P);
        cplx acc = 0.0;
        for (auto& t : terms) {
            cplx pw = std::exp(t.expo * lnP);
            acc += t.coef * pw;
            if (t.has_log) acc += t.coef_log * lnP * pw;
        }
        err += rem_coef * std::pow(P, rem_expo);
        if (cancel_coef > 0.0) err += cancel_coef * std::pow(P, cancel_expo) * (1.0 + lnP * lnP);
        return acc;
    }

    // magnitude envelope used for cap selection at levels above the innermost
    double bound_coef() const {
        double c = rem_coef;
        for (auto& t : terms) {
            c = std::max(c, std::abs(t.coef) + std::abs(t.coef_log) * 8.0);
        }
        return 2.0 * c;
    }
};

// exponent-only version (valid even when the full expansion is unavailable)
double inner_exponent(const CoefficientSequence& a, cplx sr, cplx sr1) {
    double e = -sr1.real();
    for (auto& [p0, r0] : a.poles()) e = std::max(e, (p0 - sr - sr1).real());
    return e;
}

// crude magnitude constant |S(P)| <= C * P^{e_in} for P >= 1
double inner_small_const(const CoefficientSequence& a, cplx sr, cplx sr1) {
    // |S(P)| <= sum |a(m)| m^{-Re sr} (P+m)^{-Re sr1}, requires the subset-{r}
    // region inequality; with Re sr1 >= 0 this is <= zbar(sr+sr1-alpha)
    double d = sr.real() + sr1.real() - a.alpha;
    if (sr1.real() < 0.0 || d <= 1.05) return std::numeric_limits<double>::infinity();
    return a.growth_constant() * zbar(d);
}

RegionCheck region_check_impl(const MtPoint& p, const std::vector<double>& alphas) {
    RegionCheck rc;
    rc.ok = true;
    rc.worst_margin = 1e300;
    const int r = p.r;
    const double sig_last = p.s[size_t(r)].real();
    for (unsigned mask = 1; mask < (1u << r); ++mask) {
        double acc = sig_last;
        int count = 0;
        for (int j = 0; j < r; ++j)
            if (mask & (1u << j)) {
                acc += p.s[size_t(j)].real() - alphas[size_t(j)];
                ++count;
            }
        double margin = acc - double(count);
        // ties broken toward the larger subset (the more informative witness)
        if (margin < rc.worst_margin - 1e-14 ||
            (margin < rc.worst_margin + 1e-14 && count > int(rc.worst_subset.size()))) {
            rc.worst_margin = std::min(margin, rc.worst_margin);
            rc.worst_subset.clear();
            for (int j = 0; j < r; ++j)
                if (mask & (1u << j)) rc.worst_subset.push_back(j + 1);
        }
        if (margin <= 0.0) rc.ok = false;
    }
    return rc;
}

std::vector<double> alphas_of(const std::vector<CoefficientSequence>& coeffs) {
    std::vector<double> a;
    a.reserve(coeffs.size());
    for (auto& c : coeffs) a.push_back(c.alpha);
    return a;
}

std::string subset_to_string(const std::vector<int>& subset) {
    std::string s = "{";
    for (size_t i = 0; i < subset.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(subset[i]);
    }
    return s + "}";
}

void check_point_shape(const MtPoint& p, size_t ncoeffs) {
    if (p.r < 1 || p.s.size() != size_t(p.r) + 1)
        fail(ErrKind::invalid, "MtPoint: need r >= 1 and exactly r+1 components");
    if (ncoeffs != size_t(p.r))
        fail(ErrKind::invalid, "expected " + std::to_string(p.r) + " coefficient sequences");
    for (auto& z : p.s)
        if (!finite(z)) fail(ErrKind::invalid, "MtPoint: non-finite component");
}

} // namespace

RegionCheck in_convergence_region(const MtPoint& p, const std::vector<double>& alphas) {
    if (p.r < 1 || p.s.size() != size_t(p.r) + 1 || alphas.size() != size_t(p.r))
        fail(ErrKind::invalid, "in_convergence_region: shape mismatch");
    return region_check_impl(p, alphas);
}

// ----------------------------------------------------------------------
// mt_direct

namespace {

MtResult mt_direct_r1(const MtPoint& p, const CoefficientSequence& a, double tol,
                      const MtBudget& budget) {
    (void)budget;
    long long terms = 0;
    cplx u = p.s[0] + p.s[1];
    const long long L = 64;
    cplx val = lpartial(a, u, L, terms) + ltail(a, u, L, terms);
    MtResult res;
    res.value = val;
    res.trunc.caps = {L};
    res.trunc.terms_used = terms;
    res.trunc.tail_bound = std::min(tol, 1e-13 * (std::abs(val) + 1.0));
    return res;
}

MtResult mt_direct_r2(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                      double tol, const MtBudget& budget) {
    const cplx s1 = p.s[0], sr = p.s[1], sr1 = p.s[2];
    const CoefficientSequence& a1 = coeffs[0];
    const CoefficientSequence& a2 = coeffs[1];

    long long terms = 0;
    double errsum = 0.0;
    InnerAsym ia(a2, sr, sr1);

    long long M1;
    bool analytic_outer = ia.ok;
    double e_in = ia.ok ? ia.e_in : inner_exponent(a2, sr, sr1);
    if (analytic_outer) {
        M1 = (long long)std::ceil(ia.Pbig);
    } else {
        // plain truncation of the outer index with the exponent bound
        double delta = s1.real() - a1.alpha - e_in;
        double C = inner_small_const(a2, sr, sr1) * a1.growth_constant();
        if (!(delta > 1.05) || !std::isfinite(C))
            fail(ErrKind::region,
                 "mt_direct: outer tail not boundable at this point (" + ia.why + ")");
        double eps = tol * 0.4;
        double L = std::pow(C / (eps * (delta - 1.0)), 1.0 / (delta - 1.0));
        M1 = (long long)std::ceil(std::max(8.0, L));
        if (M1 > budget.max_terms / 64)
            fail(ErrKind::budget, "mt_direct: outer cap " + std::to_string(M1) +
                                      " exceeds the term budget");
    }

    InnerCompleter inner(a2, sr, sr1, tol * 1e-3 / double(M1), terms, budget.max_terms);
    cplx val = 0.0;
    for (long long m1 = 1; m1 <= M1; ++m1) {
        cplx c1 = a1.value(m1);
        if (c1 == cplx(0.0)) continue;
        cplx w = c1 * std::exp(-s1 * std::log(double(m1)));
        double es = 0.0;
        cplx S = inner.eval(m1, es);
        val += w * S;
        errsum += std::abs(w) * es;
    }

    if (analytic_outer) {
        // sum_{m>M1} a1(m) m^{-s1} S_asym(m) through L-series tails
        for (auto& t : ia.terms) {
            cplx u = s1 - t.expo;
            val += t.coef * ltail(a1, u, M1, terms);
            if (t.has_log) val += t.coef_log * ltail_log(a1, u, M1, terms);
        }
        double d1 = s1.real() - a1.alpha;
        errsum += ia.rem_coef * a1.growth_constant() * tailsum(d1 - ia.rem_expo, double(M1));
        if (ia.cancel_coef > 0.0)
            errsum += ia.cancel_coef * a1.growth_constant() *
                      (tailsum(d1 - ia.cancel_expo, double(M1)) +
                       tailsum_log(d1 - ia.cancel_expo, double(M1)));
        errsum += 1e-14 * std::abs(val);
    } else {
        double delta = s1.real() - a1.alpha - e_in;
        double C = inner_small_const(a2, sr, sr1) * a1.growth_constant();
        errsum += C * tailsum(delta, double(M1));
    }

    if (!(errsum <= tol))
        fail(ErrKind::budget, "mt_direct: accumulated tail bound " + std::to_string(errsum) +
                                  " exceeds tol " + std::to_string(tol));
    MtResult res;
    res.value = val;
    res.trunc.caps = {M1, 0};
    res.trunc.terms_used = terms;
    res.trunc.tail_bound = errsum;
    return res;
}

MtResult mt_direct_deep(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                        double tol, const MtBudget& budget) {
    // depth >= 3: adaptive plain caps on the first r-1 indices, analytic
    // completion on the innermost one
    const int r = p.r;
    const cplx sr = p.s[size_t(r - 1)], sr1 = p.s[size_t(r)];
    const CoefficientSequence& ar = coeffs[size_t(r - 1)];

    double e_in = inner_exponent(ar, sr, sr1);
    if (e_in > 0.0)
        fail(ErrKind::region, "mt_direct: inner sums grow with the prefix at depth >= 3");
    double C_in = inner_small_const(ar, sr, sr1);
    if (!std::isfinite(C_in))
        fail(ErrKind::region, "mt_direct: no inner magnitude bound at this point");

    // per-level constants
    std::vector<double> sig(r - 1), alf(r - 1), gc(r - 1);
    for (int j = 0; j < r - 1; ++j) {
        sig[size_t(j)] = p.s[size_t(j)].real();
        alf[size_t(j)] = coeffs[size_t(j)].alpha;
        gc[size_t(j)] = coeffs[size_t(j)].growth_constant();
    }
    // chain_j = prod_{i>j} zbar(sig_i - alf_i), all factors finite required
    std::vector<double> chain(size_t(r - 1), 1.0);
    for (int j = r - 3; j >= 0; --j) {
        double z = zbar(sig[size_t(j + 1)] - alf[size_t(j + 1)]);
        if (!std::isfinite(z))
            fail(ErrKind::region, "mt_direct: level " + std::to_string(j + 2) +
                                      " too shallow for the depth->=3 bound scheme");
        chain[size_t(j)] = chain[size_t(j + 1)] * gc[size_t(j + 1)] * z;
    }

    long long terms = 0;
    double errsum = 0.0;
    const double eps_level = tol * 0.15;
    InnerCompleter inner(ar, sr, sr1, tol * 1e-4, terms, budget.max_terms);

    // uniform per-level caps: the calls at level j carry total weight at most
    // Wtot_j = prod_{i<j} C_{a_i} zbar(sigma_i - alpha_i), so a cap making the
    // per-unit-weight tail <= eps_level / Wtot_j keeps the summed tails <= eps.
    std::vector<long long> caps(size_t(r - 1), 0);
    std::vector<double> wtot(size_t(r - 1), 1.0);
    for (int j = 1; j < r - 1; ++j) {
        double z = zbar(sig[size_t(j - 1)] - alf[size_t(j - 1)]);
        if (!std::isfinite(z))
            fail(ErrKind::region, "mt_direct: level " + std::to_string(j) +
                                      " weights not summable at depth >= 3");
        wtot[size_t(j)] = wtot[size_t(j - 1)] * gc[size_t(j - 1)] * z;
    }
    for (int j = 0; j < r - 1; ++j) {
        double delta = sig[size_t(j)] - alf[size_t(j)] - e_in;
        if (!(delta > 1.05))
            fail(ErrKind::region, "mt_direct: level " + std::to_string(j + 1) +
                                      " tail exponent too small at depth >= 3");
        double coefC = wtot[size_t(j)] * gc[size_t(j)] * C_in * chain[size_t(j)];
        double eps_j = eps_level / double(r - 1);
        double L = std::pow(coefC / (eps_j * (delta - 1.0)), 1.0 / (delta - 1.0));
        caps[size_t(j)] = std::max<long long>(8, (long long)std::ceil(L));
        errsum += coefC * tailsum(delta, double(caps[size_t(j)]));
    }
    {
        long long prod = 1;
        for (auto c : caps) {
            prod *= c;
            if (prod > budget.max_terms)
                fail(ErrKind::budget, "mt_direct: depth->=3 caps exceed the term budget");
        }
    }

    cplx total = 0.0;
    std::function<void(int, long long, cplx)> walk = [&](int j, long long P, cplx W) {
        for (long long mj = 1; mj <= caps[size_t(j)]; ++mj) {
            cplx cj = coeffs[size_t(j)].value(mj);
            if (cj == cplx(0.0)) continue;
            cplx w2 = W * cj * std::exp(-p.s[size_t(j)] * std::log(double(mj)));
            if (j + 1 < r - 1) {
                walk(j + 1, P + mj, w2);
            } else {
                double es = 0.0;
                cplx S = inner.eval(P + mj, es);
                total += w2 * S;
                errsum += std::abs(w2) * es;
            }
        }
    };
    walk(0, 0, cplx(1.0));

    if (!(errsum <= tol)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e > %.3e", errsum, tol);
        fail(ErrKind::budget, std::string("mt_direct: accumulated tail bound ") + buf);
    }
    MtResult res;
    res.value = total;
    res.trunc.caps = caps;
    res.trunc.caps.push_back(0);
    res.trunc.terms_used = terms;
    res.trunc.tail_bound = errsum;
    return res;
}

} // namespace

MtResult mt_direct(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, double tol,
                   const MtBudget& budget) {
    check_point_shape(p, coeffs.size());
    RegionCheck rc = region_check_impl(p, alphas_of(coeffs));
    if (rc.worst_margin < 0.2)
        fail(ErrKind::region,
             "mt_direct: convergence-region margin " + std::to_string(rc.worst_margin) +
                 " < 0.2 for subset " + subset_to_string(rc.worst_subset));
    if (p.r == 1) return mt_direct_r1(p, coeffs[0], tol, budget);
    if (p.r == 2) return mt_direct_r2(p, coeffs, tol, budget);
    return mt_direct_deep(p, coeffs, tol, budget);
}

// ----------------------------------------------------------------------
// divisor machinery

namespace {

std::vector<long long> divisors(long long n) {
    std::vector<long long> d;
    for (long long i = 1; i * i <= n; ++i)
        if (n % i == 0) {
            d.push_back(i);
            if (i != n / i) d.push_back(n / i);
        }
    std::sort(d.begin(), d.end());
    return d;
}

} // namespace

cplx convolved_coefficient(cplx b, const CoefficientSequence& conv_slot,
                           const std::vector<CoefficientSequence>& outer,
                           const std::vector<long long>& l) {
    if (l.empty()) fail(ErrKind::invalid, "convolved_coefficient: empty index tuple");
    if (outer.size() != l.size())
        fail(ErrKind::invalid, "convolved_coefficient: need one outer sequence per index");
    long long g = 0;
    for (long long v : l) {
        if (v < 1) fail(ErrKind::invalid, "convolved_coefficient: indices must be >= 1");
        g = std::gcd(g, v);
    }
    cplx acc = 0.0;
    for (long long n : divisors(g)) {
        cplx t = conv_slot.value(n);
        if (t == cplx(0.0)) continue;
        t *= std::exp(b * std::log(double(n)));
        for (size_t j = 0; j < l.size(); ++j) t *= outer[j].value(l[j] / n);
        acc += t;
    }
    return acc;
}

cplx sigma_mt(const std::vector<cplx>& svals, const std::vector<long long>& l) {
    if (l.empty() || svals.size() != l.size() + 1)
        fail(ErrKind::invalid, "sigma_mt: need k moduli and k+1 exponents");
    long long g = 0;
    for (long long v : l) {
        if (v < 1) fail(ErrKind::invalid, "sigma_mt: moduli must be >= 1");
        g = std::gcd(g, v);
    }
    std::vector<std::vector<long long>> ds;
    for (size_t j = 0; j < l.size(); ++j) {
        std::vector<long long> dj;
        for (long long d : divisors(l[j]))
            if (d * g >= l[j]) dj.push_back(d); // d >= l_j / gcd
        ds.push_back(std::move(dj));
    }
    cplx acc = 0.0;
    std::vector<size_t> idx(l.size(), 0);
    while (true) {
        long long dsum = 0;
        cplx t = 1.0;
        for (size_t j = 0; j < l.size(); ++j) {
            long long d = ds[j][idx[j]];
            dsum += d;
            t *= std::exp(svals[j] * std::log(double(d)));
        }
        t *= std::exp(svals.back() * std::log(double(dsum)));
        acc += t;
        size_t j = 0;
        while (j < l.size() && ++idx[j] == ds[j].size()) {
            idx[j] = 0;
            ++j;
        }
        if (j == l.size()) break;
    }
    return acc;
}

// ----------------------------------------------------------------------
// gcd-convolution tables (cached per run configuration)

namespace {

struct ConvTable {
    int dim = 1;
    long long L = 0;
    std::vector<cplx> v; // dim 1: v[l-1]; dim 2: v[(l1-1)*L + (l2-1)]
    cplx at(long long l1) const { return v[size_t(l1 - 1)]; }
    cplx at(long long l1, long long l2) const { return v[size_t((l1 - 1) * L + (l2 - 1))]; }
};

std::string conv_key(cplx b, const CoefficientSequence& conv_slot,
                     const std::vector<CoefficientSequence>& outer, long long L) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g_%.17g_%lld", b.real(), b.imag(), (long long)L);
    std::string key = buf;
    key += "|" + conv_slot.label;
    for (auto& o : outer) key += "|" + o.label;
    return key;
}

std::shared_ptr<const ConvTable> conv_table(cplx b, const CoefficientSequence& conv_slot,
                                            const std::vector<CoefficientSequence>& outer,
                                            long long L) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const ConvTable>> cache;
    std::string key = conv_key(b, conv_slot, outer, L);
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto tbl = std::make_shared<ConvTable>();
    tbl->dim = int(outer.size());
    tbl->L = L;
    if (tbl->dim == 1) {
        tbl->v.assign(size_t(L), cplx(0.0));
        for (long long n = 1; n <= L; ++n) {
            cplx cn = conv_slot.value(n);
            if (cn == cplx(0.0)) continue;
            cn *= std::exp(b * std::log(double(n)));
            for (long long m = n; m <= L; m += n) {
                cplx co = outer[0].value(m / n);
                if (co != cplx(0.0)) tbl->v[size_t(m - 1)] += cn * co;
            }
        }
    } else if (tbl->dim == 2) {
        tbl->v.assign(size_t(L * L), cplx(0.0));
        std::vector<cplx> nb(size_t(L) + 1);
        for (long long n = 1; n <= L; ++n) {
            cplx cn = conv_slot.value(n);
            nb[size_t(n)] = (cn == cplx(0.0)) ? cplx(0.0)
                                              : cn * std::exp(b * std::log(double(n)));
        }
        for (long long l1 = 1; l1 <= L; ++l1)
            for (long long l2 = 1; l2 <= L; ++l2) {
                long long g = std::gcd(l1, l2);
                cplx acc = 0.0;
                for (long long n : divisors(g)) {
                    if (nb[size_t(n)] == cplx(0.0)) continue;
                    cplx t = nb[size_t(n)] * outer[0].value(l1 / n) * outer[1].value(l2 / n);
                    acc += t;
                }
                tbl->v[size_t((l1 - 1) * L + (l2 - 1))] = acc;
            }
    } else {
        fail(ErrKind::invalid, "conv_table: depth beyond 3 not supported");
    }
    std::lock_guard<std::mutex> lk(mu);
    cache[key] = tbl;
    return tbl;
}

// ----------------------------------------------------------------------
// F-series machinery

struct FContext {
    double x;
    int sign;
    cplx A, C, b; // A = s_{r+1}, C = s_r + s_{r+1}, b = sum s - 1
    cplx s_r;
    int r;
    std::vector<double> sig; // Re s_1 .. Re s_{r-1}
    const std::vector<CoefficientSequence>* coeffs;
    const CoefficientSequence* conv_slot; // coeffs->back()
    std::vector<CoefficientSequence> outer;
};

FContext make_fcontext(double x, const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                       int sign) {
    check_point_shape(p, coeffs.size());
    if (p.r < 2) fail(ErrKind::invalid, "f_series: depth r >= 2 required");
    if (p.r > 3) fail(ErrKind::invalid, "f_series: depth r <= 3 supported");
    if (!(x > 0.0)) fail(ErrKind::invalid, "f_series: x must be a positive real");
    if (sign != 1 && sign != -1) fail(ErrKind::invalid, "f_series: sign must be +-1");
    FContext fc;
    fc.x = x;
    fc.sign = sign;
    fc.r = p.r;
    fc.A = p.s[size_t(p.r)];
    fc.s_r = p.s[size_t(p.r - 1)];
    fc.C = fc.s_r + fc.A;
    fc.b = -1.0;
    for (auto& z : p.s) fc.b += z;
    fc.coeffs = &coeffs;
    fc.conv_slot = &coeffs.back();
    fc.outer.assign(coeffs.begin(), coeffs.end() - 1);
    for (int j = 0; j < p.r - 1; ++j) fc.sig.push_back(p.s[size_t(j)].real());
    return fc;
}

// k-th tail coefficient (-1)^k (1-s_r)_k (A)_k / k! * (sign*2*pi*i/x)^{-A-k}
// together with L_r(1-s_r+k) * MT_{r-1}(s_1..s_{r-1}, A+k).
struct KsumResult {
    cplx value = 0.0;
    double err = 0.0;
    std::vector<cplx> coef;   // phase-bearing coefficient per k
    std::vector<cplx> full;   // L * MT product per k
};

KsumResult f_ksum(const FContext& fc, const MtPoint& p, int N, double tol) {
    KsumResult ks;
    BranchedBase base = BranchedBase::imag_axis(TWO_PI / fc.x, fc.sign);
    cplx poch = 1.0; // (-1)^k (1-s_r)_k (A)_k / k!
    for (int k = 0; k < N; ++k) {
        cplx u = 1.0 - fc.s_r + double(k);
        if (pole_distance(*fc.conv_slot, u) < 1e-8)
            fail(ErrKind::pole, "f-series expansion: L[" + fc.conv_slot->label +
                                    "](1 - s_r + k) at a pole for k = " + std::to_string(k));
        cplx lr = fc.conv_slot->l_eval(u);
        cplx mtv;
        if (fc.r == 2) {
            mtv = fc.outer[0].l_eval(p.s[0] + fc.A + double(k));
        } else {
            MtPoint q;
            q.r = fc.r - 1;
            q.s.assign(p.s.begin(), p.s.begin() + fc.r - 1);
            q.s.push_back(fc.A + double(k));
            mtv = mt_eval_auto(q, fc.outer, tol * 0.05);
        }
        cplx coef = poch * principal_power(base, -fc.A - double(k));
        ks.coef.push_back(coef);
        ks.full.push_back(lr * mtv);
        ks.value += coef * lr * mtv;
        ks.err += std::abs(coef) * 1e-12 * (std::abs(lr * mtv) + 1.0);
        poch *= -(1.0 - fc.s_r + double(k)) * (fc.A + double(k)) / double(k + 1);
    }
    return ks;
}

// depth-3 analogue of the cancellation-free k-term tail: with the divisor
// substitution l = n m,
//   sum_{l outside [1,L0]^2} conv(l) l1^{-s1} l2^{-s2} D^{-u}
//     = sum_{n <= L0} a_r(n) n^{b-s1-s2-u} T(floor(L0/n))
//       + LTAIL_{ar}(s1+s2+u-b, L0) * MT_2(s1, s2, u)
// where T(L) sums a1(m1)a2(m2) m1^{-s1} m2^{-s2} (m1+m2)^{-u} outside the
// [1,L]^2 box, split into the m1 > L slab (inner completion + Barnes
// expansion) and the m1 <= L, m2 > L slab (binomial tails).
cplx conv_tail_r3(const FContext& fc, const MtPoint& p, cplx u, long long L0, long long& terms,
                  double& err) {
    const CoefficientSequence& a1 = fc.outer[0];
    const CoefficientSequence& a2 = fc.outer[1];
    const CoefficientSequence& ar = *fc.conv_slot;
    const cplx s1 = p.s[0], s2 = p.s[1];
    const cplx nw = fc.b - s1 - s2 - u; // n-exponent in the substituted sum

    InnerCompleter inner(a2, s2, u, 1e-15, terms, (long long)4e18);
    InnerAsym ia(a2, s2, u);
    if (!ia.ok)
        fail(ErrKind::region, "f_series depth-3 tail: no Barnes expansion for the inner sum (" +
                                  ia.why + ")");

    // LTAIL_{a2}(s2 + u + t, class) cache for the binomial slabs
    std::map<std::pair<int, long long>, cplx> lt2;
    auto ltail2 = [&](int t, long long L) -> cplx {
        auto key = std::make_pair(t, L);
        auto it = lt2.find(key);
        if (it != lt2.end()) return it->second;
        cplx v = ltail(a2, s2 + u + double(t), L, terms);
        lt2[key] = v;
        return v;
    };

    std::map<long long, std::pair<cplx, double>> tcache;
    auto T_of = [&](long long L) -> std::pair<cplx, double> {
        auto it = tcache.find(L);
        if (it != tcache.end()) return it->second;
        cplx acc = 0.0;
        double e = 0.0;
        // slab: m1 <= L, m2 > L
        for (long long m1 = 1; m1 <= L; ++m1) {
            cplx c1 = a1.value(m1);
            if (c1 == cplx(0.0)) continue;
            cplx w1 = c1 * std::exp(-s1 * std::log(double(m1)));
            long long L2 = L;
            while (L2 < 3 * m1) L2 *= 2; // binomial ratio <= 1/3
            cplx jt = 0.0;
            if (L2 > L) {
                kern::Terms kt;
                kt.log_a = log_table(m1 + L2) + 1 + L;
                kt.log_b = log_table(m1 + L2) + 1 + L + m1;
                kt.n = size_t(L2 - L);
                std::vector<double> wre, wim;
                bool has_w = a2.kind != CoefficientSequence::Kind::ones;
                if (has_w) {
                    wre.resize(size_t(L2 - L));
                    wim.resize(size_t(L2 - L));
                    bool any_im = false;
                    for (long long m2 = L + 1; m2 <= L2; ++m2) {
                        cplx v = a2.value(m2);
                        wre[size_t(m2 - L - 1)] = v.real();
                        wim[size_t(m2 - L - 1)] = v.imag();
                        if (v.imag() != 0.0) any_im = true;
                    }
                    kt.w_re = wre.data();
                    kt.w_im = any_im ? wim.data() : nullptr;
                }
                terms += L2 - L;
                jt += kern::pow_sum(s2, u, kt);
            }
            // binomial tail from L2: sum_t binom(-u, t) m1^t LTAIL_{a2}(s2+u+t, L2)
            cplx bt = 1.0, Pt = 1.0;
            double mag = 0.0;
            for (int t = 0; t < 72; ++t) {
                cplx tm = bt * Pt * ltail2(t, L2);
                jt += tm;
                mag = std::max(mag, std::abs(jt));
                if (std::abs(tm) < 1e-17 * (mag + 1e-300) && t >= 3) {
                    e += std::abs(tm) * 3.0 * std::abs(w1);
                    break;
                }
                bt *= (-u - double(t)) / double(t + 1);
                Pt *= double(m1);
            }
            acc += w1 * jt;
            e += 5e-16 * std::abs(w1 * jt);
        }
        // slab: m1 > L, all m2 (full inner sums up to the Barnes threshold)
        long long Mbig = std::max(L + 1, (long long)std::ceil(ia.Pbig));
        for (long long m1 = L + 1; m1 <= Mbig; ++m1) {
            cplx c1 = a1.value(m1);
            if (c1 == cplx(0.0)) continue;
            cplx w1 = c1 * std::exp(-s1 * std::log(double(m1)));
            double es = 0.0;
            acc += w1 * inner.eval(m1, es);
            e += std::abs(w1) * es;
        }
        for (auto& t : ia.terms) {
            cplx uu = s1 - t.expo;
            acc += t.coef * ltail(a1, uu, Mbig, terms);
            if (t.has_log) acc += t.coef_log * ltail_log(a1, uu, Mbig, terms);
        }
        double d1 = s1.real() - a1.alpha;
        e += ia.rem_coef * a1.growth_constant() * tailsum(d1 - ia.rem_expo, double(Mbig));
        if (ia.cancel_coef > 0.0)
            e += ia.cancel_coef * a1.growth_constant() *
                 (tailsum(d1 - ia.cancel_expo, double(Mbig)) +
                  tailsum_log(d1 - ia.cancel_expo, double(Mbig)));
        auto res = std::make_pair(acc, e);
        tcache[L] = res;
        return res;
    };

    cplx total = 0.0;
    for (long long n = 1; n <= L0; ++n) {
        cplx an = ar.value(n);
        if (an == cplx(0.0)) continue;
        cplx wn = an * std::exp(nw * std::log(double(n)));
        auto [tv, te] = T_of(L0 / n);
        total += wn * tv;
        err += std::abs(wn) * te;
    }
    // n > L0: the whole box scales out, T(0) = full depth-2 value
    {
        MtPoint q(2, {s1, s2, u});
        std::vector<CoefficientSequence> in2{a1, a2};
        cplx full = mt_eval_auto(q, in2, 1e-12);
        cplx lt = ltail(ar, -nw, L0, terms);
        total += lt * full;
        err += 1e-13 * std::abs(lt * full);
    }
    return total;
}

// factorized bound for the rho_N-weighted series beyond a box of side L0
// (L0 = 0 bounds the whole series); pref carries the caller's prefactors.
double rho_tail_bound(const FContext& fc, int N, long long L0, double pref) {
    const int dim = fc.r - 1;
    double beta = fc.b.real();
    double beta_eff = std::max(beta, 0.0) + 0.5; // sigma_beta(g) <= sqrt(3) g^{beta_eff}
    double q = fc.A.real() + double(N);
    double C = pref * 1.7320508075688772; // sqrt(3)
    for (auto& c : *fc.coeffs) C *= c.growth_constant();
    C *= std::pow(double(dim), -q);
    std::vector<double> e(static_cast<size_t>(dim));
    for (int j = 0; j < dim; ++j) {
        e[size_t(j)] = beta_eff / dim + fc.outer[size_t(j)].alpha - fc.sig[size_t(j)] - q / dim;
        if (!(e[size_t(j)] < -1.05)) return std::numeric_limits<double>::infinity();
    }
    if (L0 <= 0) {
        double prod = 1.0;
        for (int j = 0; j < dim; ++j) prod *= zbar(-e[size_t(j)]);
        return C * prod;
    }
    double total = 0.0;
    for (int i = 0; i < dim; ++i) {
        double part = tailsum(-e[size_t(i)], double(L0));
        for (int j = 0; j < dim; ++j)
            if (j != i) part *= zbar(-e[size_t(j)]);
        total += part;
    }
    return C * total;
}

} // namespace

bool f_series_admissible(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs) {
    check_point_shape(p, coeffs.size());
    if (p.r < 2 || p.r > 3) return false;
    const int r = p.r;
    if (!(p.s[size_t(r - 1)].real() < -coeffs[size_t(r - 1)].alpha - 0.05)) return false;
    const double sig_last = p.s[size_t(r)].real();
    for (unsigned mask = 1; mask < (1u << (r - 1)); ++mask) {
        double acc = sig_last;
        int count = 0;
        for (int j = 0; j < r - 1; ++j)
            if (mask & (1u << j)) {
                acc += p.s[size_t(j)].real() - coeffs[size_t(j)].alpha;
                ++count;
            }
        if (!(acc - double(count) > 0.1)) return false;
    }
    return true;
}

FSeriesResult f_series(double x, const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                       int sign, double tol) {
    FContext fc = make_fcontext(x, p, coeffs, sign);
    if (!f_series_admissible(p, coeffs))
        fail(ErrKind::region, "f_series: Psi-weighted series not absolutely convergent here "
                              "(use f_series_continued)");

    long long terms = 0;
    for (long long L0 = 48;; L0 *= 2) {
        for (int N = 10; N <= 40; N += 6) {
            double bound = rho_tail_bound(fc, N, L0, psi_asym_bound(fc.A, fc.C, TWO_PI / x, N));
            if (!std::isfinite(bound) || bound > tol * 0.3) {
                if (std::getenv("MTDS_DEBUG_F"))
                    std::fprintf(stderr, "[f_series dbg] L0=%lld N=%d bound gate %.3e\n", L0, N, bound);
                continue;
            }

            auto tbl = conv_table(fc.b, *fc.conv_slot, fc.outer, L0);
            double head_err = 0.0;
            cplx head = 0.0;
            // Psi cache over D
            long long Dmax = (fc.r - 1) * L0;
            std::vector<PsiEvaluation> psis(size_t(Dmax) + 1);
            std::vector<char> have(size_t(Dmax) + 1, 0);
            auto psi_at = [&](long long D) -> const PsiEvaluation& {
                if (!have[size_t(D)]) {
                    psis[size_t(D)] =
                        psi(fc.A, fc.C, BranchedBase::imag_axis(TWO_PI * double(D) / x, sign),
                            1e-11);
                    have[size_t(D)] = 1;
                }
                return psis[size_t(D)];
            };
            if (fc.r == 2) {
                for (long long l = 1; l <= L0; ++l) {
                    cplx cv = tbl->at(l);
                    if (cv == cplx(0.0)) continue;
                    cplx w = cv * std::exp(-p.s[0] * std::log(double(l)));
                    const PsiEvaluation& ev = psi_at(l);
                    head += w * ev.value;
                    head_err += std::abs(w) * ev.error_bound;
                    ++terms;
                }
            } else {
                for (long long l1 = 1; l1 <= L0; ++l1) {
                    cplx w1 = std::exp(-p.s[0] * std::log(double(l1)));
                    for (long long l2 = 1; l2 <= L0; ++l2) {
                        cplx cv = tbl->at(l1, l2);
                        if (cv == cplx(0.0)) continue;
                        cplx w = cv * w1 * std::exp(-p.s[1] * std::log(double(l2)));
                        const PsiEvaluation& ev = psi_at(l1 + l2);
                        head += w * ev.value;
                        head_err += std::abs(w) * ev.error_bound;
                        ++terms;
                    }
                }
            }

            cplx tail = 0.0;
            double ks_err = 0.0;
            if (fc.r == 2) {
                // each k-term's series tail, cancellation-free through the
                // convolution structure:
                //   sum_{l>L0} conv(l) l^{-u}
                //     = sum_{n<=L0} a_r(n) n^{b-u} LTAIL_{a1}(u, floor(L0/n))
                //       + LTAIL_{ar}(u-b, L0) L_{a1}(u)
                BranchedBase base = BranchedBase::imag_axis(TWO_PI / x, sign);
                cplx poch = 1.0; // (-1)^k (1-s_r)_k (A)_k / k!
                for (int k = 0; k < N; ++k) {
                    cplx u = p.s[0] + fc.A + double(k);
                    cplx u2 = 1.0 - fc.s_r + double(k); // = u - b
                    if (pole_distance(*fc.conv_slot, u2) < 1e-8 ||
                        pole_distance(fc.outer[0], u) < 1e-8)
                        fail(ErrKind::pole,
                             "f_series: expansion term hits an L-function pole at k = " +
                                 std::to_string(k));
                    cplx coef = poch * principal_power(base, -fc.A - double(k));
                    cplx ct = 0.0;
                    double mag = 0.0;
                    long long prev_floor = -1;
                    cplx lt_cache = 0.0;
                    for (long long n = 1; n <= L0; ++n) {
                        cplx av = fc.conv_slot->value(n);
                        if (av == cplx(0.0)) continue;
                        long long fl = L0 / n;
                        if (fl != prev_floor) {
                            lt_cache = ltail(fc.outer[0], u, fl, terms);
                            prev_floor = fl;
                        }
                        cplx t = av * std::exp((fc.b - u) * std::log(double(n))) * lt_cache;
                        ct += t;
                        mag += std::abs(t);
                    }
                    {
                        cplx t = ltail(*fc.conv_slot, u2, L0, terms) * fc.outer[0].l_eval(u);
                        ct += t;
                        mag += std::abs(t);
                    }
                    tail += coef * ct;
                    ks_err += std::abs(coef) * (1e-13 * mag);
                    poch *= -(1.0 - fc.s_r + double(k)) * (fc.A + double(k)) / double(k + 1);
                }
            } else {
                // depth 3: cancellation-free k-term tails via the divisor
                // substitution (mirrors the r = 2 route)
                BranchedBase base = BranchedBase::imag_axis(TWO_PI / x, sign);
                cplx poch = 1.0;
                for (int k = 0; k < N; ++k) {
                    cplx u = fc.A + double(k);
                    cplx u2 = 1.0 - fc.s_r + double(k);
                    if (pole_distance(*fc.conv_slot, u2) < 1e-8)
                        fail(ErrKind::pole,
                             "f_series: expansion term hits an L-function pole at k = " +
                                 std::to_string(k));
                    cplx coef = poch * principal_power(base, -fc.A - double(k));
                    double te = 0.0;
                    cplx ct = conv_tail_r3(fc, p, u, L0, terms, te);
                    tail += coef * ct;
                    ks_err += std::abs(coef) * te;
                    poch *= -(1.0 - fc.s_r + double(k)) * (fc.A + double(k)) / double(k + 1);
                }
            }

            double total_err = head_err + ks_err + bound + 1e-14 * (std::abs(head) + 1.0);
            if (std::getenv("MTDS_DEBUG_F"))
                std::fprintf(stderr, "[f_series dbg] L0=%lld N=%d bound=%.3e head_err=%.3e ks_err=%.3e total=%.3e tol=%.3e\n",
                             L0, N, bound, head_err, ks_err, total_err, tol);
            if (total_err > tol) continue;

            FSeriesResult out;
            out.value = head + tail;
            out.trunc.caps.assign(size_t(fc.r - 1), L0);
            out.trunc.terms_used = terms;
            out.trunc.tail_bound = total_err;
            return out;
        }
        if (L0 >= 768)
            fail(ErrKind::budget, "f_series: could not reach the requested tolerance " +
                                      std::to_string(tol));
    }
}

int f_continued_min_n(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs) {
    check_point_shape(p, coeffs.size());
    const int r = p.r;
    for (int N = 1; N <= 36; ++N) {
        if (!(p.s[size_t(r - 1)].real() < double(N) - coeffs[size_t(r - 1)].alpha - 0.3)) continue;
        bool ok = true;
        const double sig_last = p.s[size_t(r)].real();
        for (unsigned mask = 1; mask < (1u << (r - 1)) && ok; ++mask) {
            double acc = sig_last + double(N);
            int count = 0;
            for (int j = 0; j < r - 1; ++j)
                if (mask & (1u << j)) {
                    acc += p.s[size_t(j)].real() - coeffs[size_t(j)].alpha;
                    ++count;
                }
            if (!(acc - double(count) > 0.3)) ok = false;
        }
        if (ok) return std::min(N + 4, 40);
    }
    fail(ErrKind::region, "f_series_continued: no workable N <= 36 at this point");
}

cplx f_series_continued(double x, const MtPoint& p,
                        const std::vector<CoefficientSequence>& coeffs, int sign, int N,
                        double tol) {
    FContext fc = make_fcontext(x, p, coeffs, sign);
    // remainder-series convergence conditions
    if (!(fc.s_r.real() < double(N) - fc.conv_slot->alpha - 0.05))
        fail(ErrKind::region, "f_series_continued: N too small (need Re s_r < N - alpha_r)");
    {
        const double sig_last = fc.A.real();
        for (unsigned mask = 1; mask < (1u << (fc.r - 1)); ++mask) {
            double acc = sig_last + double(N);
            int count = 0;
            for (int j = 0; j < fc.r - 1; ++j)
                if (mask & (1u << j)) {
                    acc += p.s[size_t(j)].real() - fc.outer[size_t(j)].alpha;
                    ++count;
                }
            if (!(acc - double(count) > 0.05))
                fail(ErrKind::region,
                     "f_series_continued: N too small for the shifted subset inequalities");
        }
    }

    KsumResult ks = f_ksum(fc, p, N, tol);

    // rho_N-weighted remainder series in the reflected orientation
    const cplx ap = 1.0 - fc.s_r;
    const cplx cp = 2.0 - fc.C;
    BranchedBase base = BranchedBase::imag_axis(TWO_PI / x, sign);
    const cplx pref = principal_power(base, 1.0 - fc.C);
    const double pref_mag = std::abs(pref);

    double err = ks.err;
    cplx rho_sum = 0.0;
    long long Lr = 8;
    double bound;
    for (;; Lr *= 2) {
        bound = rho_tail_bound(fc, N, Lr, pref_mag * psi_asym_bound(ap, cp, TWO_PI / x, N));
        if (std::isfinite(bound) && bound <= tol * 0.3) break;
        if (Lr >= 512)
            fail(ErrKind::budget, "f_series_continued: remainder series will not meet tol");
    }
    auto tbl = conv_table(fc.b, *fc.conv_slot, fc.outer, Lr);

    // group the remainder series by D = sum of indices (rho depends on D
    // only), then decide compute-vs-drop per group by its contribution
    const long long Dmax = (fc.r - 1) * Lr;
    std::vector<cplx> wsum(size_t(Dmax) + 1, cplx(0.0));
    std::vector<double> wmass(size_t(Dmax) + 1, 0.0);
    if (fc.r == 2) {
        for (long long l = 1; l <= Lr; ++l) {
            cplx cv = tbl->at(l);
            if (cv == cplx(0.0)) continue;
            cplx w = cv * std::exp(-p.s[0] * std::log(double(l)) -
                                   (fc.C - 1.0) * std::log(double(l)));
            wsum[size_t(l)] += w;
            wmass[size_t(l)] += std::abs(w);
        }
    } else {
        for (long long l1 = 1; l1 <= Lr; ++l1)
            for (long long l2 = 1; l2 <= Lr; ++l2) {
                cplx cv = tbl->at(l1, l2);
                if (cv == cplx(0.0)) continue;
                cplx w = cv *
                         std::exp(-p.s[0] * std::log(double(l1)) -
                                  p.s[1] * std::log(double(l2)) -
                                  (fc.C - 1.0) * std::log(double(l1 + l2)));
                wsum[size_t(l1 + l2)] += w;
                wmass[size_t(l1 + l2)] += std::abs(w);
            }
    }
    const double drop_budget = tol * 0.2;
    double dropped = 0.0;
    for (long long D = 1; D <= Dmax; ++D) {
        if (wmass[size_t(D)] == 0.0) continue;
        BranchedBase y = BranchedBase::imag_axis(TWO_PI * double(D) / x, sign);
        double rb = psi_asym_bound(ap, cp, y.mod(), N);
        double contrib = wmass[size_t(D)] * rb * pref_mag;
        if (contrib < drop_budget / double(Dmax)) {
            dropped += contrib;
            continue;
        }
        PsiEvaluation full = psi_contour_quality(ap, cp, y);
        cplx part = 0.0;
        cplx term = principal_power(y, -ap);
        cplx yinv = std::exp(-y.log());
        for (int k = 0; k < N; ++k) {
            part += term;
            term *= -(ap + double(k)) * (ap - cp + 1.0 + double(k)) / double(k + 1) * yinv;
        }
        rho_sum += wsum[size_t(D)] * (full.value - part);
        err += wmass[size_t(D)] * (full.error_bound + 1e-14 * std::abs(full.value)) * pref_mag;
    }
    err += dropped + bound;
    if (std::getenv("MTDS_DEBUG_F"))
        std::fprintf(stderr, "[f_cont dbg] N=%d Lr=%lld ks_err=%.3e bound=%.3e err=%.3e tol=%.3e\n",
                     N, Lr, ks.err, bound, err, tol);
    if (err > tol)
        fail(ErrKind::budget, "f_series_continued: error budget " + std::to_string(err) +
                                  " exceeds tol");
    return ks.value + pref * rho_sum;
}

// ----------------------------------------------------------------------
// Barnes recursion routes

namespace {

struct MbWindow {
    double lo, hi;
};

MbWindow mb_window(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs) {
    const int r = p.r;
    double lo = -p.s[size_t(r)].real();
    double hi = 0.0;
    // L_r(s_r - z) absolutely convergent: Re(s_r) - c > alpha_r + 1
    hi = std::min(hi, p.s[size_t(r - 1)].real() - coeffs[size_t(r - 1)].alpha - 1.0);
    // depth-(r-1) region at s_{r+1} + c
    const double sig_last = p.s[size_t(r)].real();
    for (unsigned mask = 1; mask < (1u << (r - 1)); ++mask) {
        double acc = sig_last;
        int count = 0;
        for (int j = 0; j < r - 1; ++j)
            if (mask & (1u << j)) {
                acc += p.s[size_t(j)].real() - coeffs[size_t(j)].alpha;
                ++count;
            }
        lo = std::max(lo, double(count) - acc);
    }
    return {lo, hi};
}

cplx mb_inner_factor(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, cplx z,
                     double tol_node) {
    const int r = p.r;
    if (r == 2) return coeffs[0].l_eval(p.s[0] + p.s[2] + z);
    MtPoint q;
    q.r = r - 1;
    q.s.assign(p.s.begin(), p.s.begin() + (r - 1));
    q.s.push_back(p.s[size_t(r)] + z);
    std::vector<CoefficientSequence> inner(coeffs.begin(), coeffs.end() - 1);
    return mt_eval_auto(q, inner, tol_node);
}

// horizontal distances from the contour to all integrand pole lines
double mb_line_distance(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                        double c) {
    const int r = p.r;
    double d = 1e300;
    for (int n = 0; n < 80; ++n) {
        d = std::min(d, std::abs(c - double(n)));                              // Gamma(-z)
        d = std::min(d, std::abs(c + p.s[size_t(r)].real() + double(n)));     // Gamma(s_{r+1}+z)
    }
    for (auto& [p0, res] : coeffs[size_t(r - 1)].poles())
        d = std::min(d, std::abs(c - (p.s[size_t(r - 1)] - p0).real()));
    if (r == 2) {
        for (auto& [p0, res] : coeffs[0].poles())
            d = std::min(d, std::abs(c - (p0 - p.s[0] - p.s[2]).real()));
    } else {
        // singular hyperplanes of the depth-(r-1) factor (principal-like slots)
        const double sig_last = p.s[size_t(r)].real();
        for (unsigned mask = 1; mask < (1u << (r - 1)); ++mask) {
            bool all_pr = true;
            double acc = sig_last;
            int count = 0;
            for (int j = 0; j < r - 1; ++j)
                if (mask & (1u << j)) {
                    if (!coeffs[size_t(j)].principal_like) all_pr = false;
                    acc += p.s[size_t(j)].real();
                    ++count;
                }
            if (!all_pr) continue;
            double base = double(count) - acc; // Re z = base - l, l >= 0
            for (int l = 0; l < 80; ++l) {
                double line = base - double(l);
                if (line < c - 2.0) break;
                d = std::min(d, std::abs(c - line));
            }
        }
    }
    return d;
}

cplx mb_line_quadrature(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                        double c, double T, double h, double tol_node) {
    const int r = p.r;
    const cplx sr1 = p.s[size_t(r)];
    const cplx lg_norm = log_gamma(sr1);
    auto f = [&](double y) -> cplx {
        cplx z(c, y);
        cplx K = std::exp(log_gamma(sr1 + z) + log_gamma(-z) - lg_norm);
        if (std::abs(K) < 1e-22) return 0.0;
        return K * mb_inner_factor(p, coeffs, z, tol_node) *
               coeffs[size_t(r - 1)].l_eval(p.s[size_t(r - 1)] - z);
    };
    cplx acc = f(0.0);
    long long K = (long long)std::ceil(T / h);
    int calm = 0;
    for (long long k = 1; k <= K; ++k) {
        cplx up = f(double(k) * h), dn = f(-double(k) * h);
        acc += up + dn;
        if (std::abs(up) + std::abs(dn) < 1e-19 * (std::abs(acc) + 1e-280)) {
            if (++calm >= 8) break;
        } else {
            calm = 0;
        }
    }
    return acc * (h / TWO_PI);
}

} // namespace

cplx mt_via_mb(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, double c_absc,
               double T, double h) {
    check_point_shape(p, coeffs.size());
    if (p.r == 1) return coeffs[0].l_eval(p.s[0] + p.s[1]); // depth-1 reduction
    MbWindow w = mb_window(p, coeffs);
    if (!(w.lo < w.hi))
        fail(ErrKind::region, "mt_via_mb: empty contour window (max " + std::to_string(w.lo) +
                                  " < c < " + std::to_string(w.hi) + ")");
    if (!(c_absc > w.lo && c_absc < w.hi))
        fail(ErrKind::invalid, "mt_via_mb: abscissa c = " + std::to_string(c_absc) +
                                   " outside the window (" + std::to_string(w.lo) + ", " +
                                   std::to_string(w.hi) + ")");
    double Tq = T;
    if (Tq <= 0.0) {
        Tq = 40.0;
        for (auto& z : p.s) Tq += 2.0 * std::abs(z.imag());
    }
    double hq = h;
    if (hq <= 0.0) {
        double d = mb_line_distance(p, coeffs, c_absc);
        if (d < 1e-3)
            fail(ErrKind::pole, "mt_via_mb: contour passes within 1e-3 of an integrand pole");
        hq = std::min(0.05, TWO_PI * d / 42.0);
    }
    return mb_line_quadrature(p, coeffs, c_absc, Tq, hq, 1e-10);
}

cplx mt_continued(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, int M,
                  double tol) {
    check_point_shape(p, coeffs.size());
    if (p.r == 1) return coeffs[0].l_eval(p.s[0] + p.s[1]);
    const int r = p.r;
    const cplx sr = p.s[size_t(r - 1)], sr1 = p.s[size_t(r)];
    const CoefficientSequence& ar = coeffs[size_t(r - 1)];
    std::vector<CoefficientSequence> inner_seqs(coeffs.begin(), coeffs.end() - 1);

    if (M <= 0) {
        double need = 0.5; // contour must sit right of every collected pole line
        for (auto& [p0, res] : ar.poles()) need = std::max(need, (sr - p0).real() + 0.9);
        if (r == 2) {
            for (auto& [p0, res] : coeffs[0].poles())
                need = std::max(need, (p0 - p.s[0] - sr1).real() + 0.9);
        } else {
            const double sig_last = sr1.real();
            for (unsigned mask = 1; mask < (1u << (r - 1)); ++mask) {
                bool all_pr = true;
                double acc = sig_last;
                int count = 0;
                for (int j = 0; j < r - 1; ++j)
                    if (mask & (1u << j)) {
                        if (!coeffs[size_t(j)].principal_like) all_pr = false;
                        acc += p.s[size_t(j)].real();
                        ++count;
                    }
                if (all_pr) need = std::max(need, double(count) - acc + 0.9);
            }
        }
        M = std::max(1, int(std::ceil(need)));
    }
    const double c = double(M) - 0.5;

    // residues of Gamma(-z) at z = k
    cplx val = 0.0;
    cplx poch = 1.0; // (-1)^k (s_{r+1})_k / k!
    for (int k = 0; k < M; ++k) {
        cplx u = sr - double(k);
        if (pole_distance(ar, u) < 1e-8)
            fail(ErrKind::pole, "mt_continued: residue term hits a pole of L[" + ar.label +
                                    "] (s_r near an integer offset of a pole)");
        cplx innerv;
        if (r == 2)
            innerv = coeffs[0].l_eval(p.s[0] + sr1 + double(k));
        else {
            MtPoint q;
            q.r = r - 1;
            q.s.assign(p.s.begin(), p.s.begin() + (r - 1));
            q.s.push_back(sr1 + double(k));
            innerv = mt_eval_auto(q, inner_seqs, tol * 0.02);
        }
        val += poch * innerv * ar.l_eval(u);
        poch *= -(sr1 + double(k)) / double(k + 1);
    }

    // collected poles of L_r(s_r - z) at z* = s_r - p0
    for (auto& [p0, res0] : ar.poles()) {
        cplx zs = sr - p0;
        if (zs.real() >= c) continue; // not collected (kept right of the contour by M)
        // collision with a Gamma(-z) pole = a singular-hyperplane adjacency
        if (std::abs(zs.imag()) < 1e-8) {
            double rr = std::round(zs.real());
            if (rr >= 0.0 && std::abs(zs.real() - rr) < 1e-8)
                fail(ErrKind::pole,
                     "mt_continued: double pole (s_r - pole is a non-negative integer)");
        }
        cplx innerv;
        if (r == 2)
            innerv = coeffs[0].l_eval(p.s[0] + sr1 + zs);
        else {
            MtPoint q;
            q.r = r - 1;
            q.s.assign(p.s.begin(), p.s.begin() + (r - 1));
            q.s.push_back(sr1 + zs);
            innerv = mt_eval_auto(q, inner_seqs, tol * 0.02);
        }
        val += res0 * std::exp(log_gamma(sr1 + zs) + log_gamma(-zs) - log_gamma(sr1)) * innerv;
    }

    double T = 40.0;
    for (auto& z : p.s) T += 2.0 * std::abs(z.imag());
    double d = mb_line_distance(p, coeffs, c);
    if (d < 1e-3)
        fail(ErrKind::pole, "mt_continued: shifted contour passes within 1e-3 of a pole");
    double h = std::min(0.05, TWO_PI * d / 42.0);
    val += mb_line_quadrature(p, coeffs, c, T, h, std::min(1e-10, tol * 0.02));
    return val;
}

cplx mt_eval_auto(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, double tol) {
    check_point_shape(p, coeffs.size());
    RegionCheck rc = region_check_impl(p, alphas_of(coeffs));
    if (rc.worst_margin >= 0.2) {
        try {
            return mt_direct(p, coeffs, tol).value;
        } catch (const Error& e) {
            if (e.kind != ErrKind::budget && e.kind != ErrKind::region) throw;
        }
    }
    return mt_continued(p, coeffs, 0, tol);
}

cplx big_g_modified(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                    double tol) {
    check_point_shape(p, coeffs.size());
    if (p.r < 2) fail(ErrKind::invalid, "modified function: depth r >= 2 required");
    const int r = p.r;
    const cplx sr = p.s[size_t(r - 1)], sr1 = p.s[size_t(r)];
    if (near_gamma_pole(1.0 - sr, 1e-6))
        fail(ErrKind::pole, "modified function: Gamma(1 - s_r) pole at s_r = " +
                                cplx_to_string(sr));
    if (near_gamma_pole(sr + sr1 - 1.0, 1e-6))
        fail(ErrKind::pole, "modified function: Gamma(s_r + s_{r+1} - 1) pole");
    cplx ratio = gamma_ratio({1.0 - sr, sr + sr1 - 1.0}, {sr1});

    cplx first = mt_eval_auto(p, coeffs, tol * 0.5);

    MtPoint q;
    q.r = r - 1;
    q.s.assign(p.s.begin(), p.s.begin() + (r - 1));
    q.s.push_back(sr + sr1 - 1.0);
    std::vector<CoefficientSequence> inner(coeffs.begin(), coeffs.end() - 1);
    cplx second = mt_eval_auto(q, inner, tol * 0.5 / std::max(1.0, std::abs(ratio)));
    return first - ratio * second;
}

cplx g_modified(const MtPoint& p, double tol) {
    std::vector<CoefficientSequence> ones(size_t(p.r), coeff_ones());
    return big_g_modified(p, ones, tol);
}

} // namespace mtds
