#include "mtds/zeta.hpp"

#include <cmath>
#include <vector>

#include "mtds/bernoulli.hpp"
#include "mtds/errors.hpp"
#include "mtds/gamma.hpp"
#include "mtds/kernels.hpp"

namespace mtds {

namespace {

constexpr double IM_ENVELOPE = 1.0e3;
constexpr double FAR_LEFT_SIGMA = -4.5;
constexpr int EM_ORDER = 12;

// Euler-Maclaurin: sum_{n<M} (n+a)^{-s} + (M+a)^{1-s}/(s-1) + (M+a)^{-s}/2
//                  + sum_{k=1}^{K} B_{2k}/(2k)! (s)_{2k-1} (M+a)^{-s-2k+1}
cplx hurwitz_em(cplx s, double a) {
    const double sigma = s.real();
    const double t = std::abs(s.imag());
    int M;
    if (a > 1.5) {
        // offset evaluation (series tails): M+a large enough that 12
        // corrections clear the 1e-8 remainder check even for large Re s
        double need = std::max((std::abs(s) + 2.0 * EM_ORDER + 2.0) / 2.8, 2.0 * t) - a;
        M = std::max(0, int(std::ceil(need)));
    } else if (sigma >= -1.0)
        M = std::max({30, int(std::ceil(2.0 * t)),
                      int(std::ceil((std::abs(s) + 2.0 * EM_ORDER + 2.0) / 2.8 - a))});
    else
        // shrink the main sum when terms grow, to contain cancellation
        M = std::max({8, int(std::ceil((std::abs(s) + 2.0 * EM_ORDER + 2.0) / 4.5)),
                      int(std::ceil(2.0 * t))});

    std::vector<double> logs(static_cast<size_t>(M));
    for (int n = 0; n < M; ++n) logs[size_t(n)] = std::log(double(n) + a);
    kern::Terms terms;
    terms.log_a = logs.data();
    terms.n = logs.size();
    cplx main = kern::pow_sum(s, 0.0, terms);

    const double Ma = double(M) + a;
    const cplx lp = std::log(Ma);
    cplx val = main + std::exp((1.0 - s) * lp) / (s - 1.0) + 0.5 * std::exp(-s * lp);

    cplx poch = s;                       // (s)_{2k-1}, k = 1
    const cplx Ma2 = std::exp(-2.0 * lp);
    cplx p = std::exp(-(s + 1.0) * lp);  // (M+a)^{-s-2k+1}, k = 1
    for (int k = 1; k <= EM_ORDER; ++k) {
        val += b2k_over_fact(k) * poch * p;
        poch *= (s + double(2 * k - 1)) * (s + double(2 * k));
        p *= Ma2;
    }
    // remainder magnitude check (fails loudly)
    double rem = std::abs(b2k_over_fact(EM_ORDER + 1)) * std::abs(poch) *
                 std::pow(Ma, -(sigma + 2.0 * EM_ORDER + 1.0));
    double denom = sigma + 2.0 * EM_ORDER + 1.0;
    if (denom <= 0.5)
        fail(ErrKind::envelope, "hurwitz_zeta: Euler-Maclaurin order insufficient at Re s = " +
                                    std::to_string(sigma));
    rem *= std::abs(s + 2.0 * EM_ORDER + 1.0) / denom;
    if (!(rem <= 1e-8 * (std::abs(val) + 1e-30) + 1e-280))
        fail(ErrKind::nonconvergence,
             "hurwitz_zeta: tail remainder bound " + std::to_string(rem) + " too large at s = " +
                 cplx_to_string(s) + ", a = " + std::to_string(a) + ", M = " + std::to_string(M));
    return val;
}

// Periodic zeta F(x, u) = sum_{n>=1} e^{2 pi i n x} n^{-u}, Re u > 1.
cplx periodic_zeta(double x, cplx u) {
    const double ru = u.real();
    if (ru < 2.0) fail(ErrKind::invalid, "periodic_zeta: Re u too small");
    // plain truncation: tail <= N^{1-ru}/(ru-1)
    double N_d = std::pow(1e-17, 1.0 / (1.0 - ru));
    std::size_t N = std::size_t(std::min(5.0e5, std::max(32.0, std::ceil(N_d))));
    std::vector<double> logs(N), wre(N), wim(N);
    for (std::size_t n = 1; n <= N; ++n) {
        logs[n - 1] = std::log(double(n));
        double ph = TWO_PI * std::fmod(double(n) * x, 1.0);
        wre[n - 1] = std::cos(ph);
        wim[n - 1] = std::sin(ph);
    }
    kern::Terms t;
    t.log_a = logs.data();
    t.w_re = wre.data();
    t.w_im = wim.data();
    t.n = N;
    return kern::pow_sum(u, 0.0, t);
}

// Hurwitz's formula, used for Re s < FAR_LEFT_SIGMA:
// zeta(s,a) = Gamma(1-s)/(2 pi)^{1-s} { e^{-i pi (1-s)/2} F(a, 1-s)
//                                     + e^{+i pi (1-s)/2} F(-a, 1-s) }
cplx hurwitz_far_left(cplx s, double a) {
    const cplx u = 1.0 - s;
    const cplx lg = log_gamma(u) - u * std::log(TWO_PI);
    const cplx rot = cplx(0.0, PI / 2) * u;
    cplx t1 = std::exp(lg - rot) * periodic_zeta(a, u);
    cplx t2 = std::exp(lg + rot) * periodic_zeta(-a, u);
    return t1 + t2;
}

// cos(pi w / 2) stably for large |Im w|: returns log of it.
cplx log_cos_half_pi(cplx w) {
    if (std::abs(w.imag()) <= 40.0) {
        cplx c = std::cos(PI * w / 2.0);
        if (c == cplx(0.0, 0.0)) fail(ErrKind::pole, "cos factor vanishes");
        return std::log(c);
    }
    const cplx iw(0.0, 1.0);
    if (w.imag() > 0.0) {
        // cos(pi w/2) = e^{-i pi w/2} (1 + e^{i pi w}) / 2
        return -iw * PI * w / 2.0 - std::log(2.0) + std::log(1.0 + std::exp(iw * PI * w));
    }
    return iw * PI * w / 2.0 - std::log(2.0) + std::log(1.0 + std::exp(-iw * PI * w));
}

} // namespace

cplx hurwitz_zeta(cplx s, double a) {
    if (!(a > 0.0 && a <= 1.0)) fail(ErrKind::invalid, "hurwitz_zeta: need a in (0, 1]");
    if (std::abs(s - 1.0) < 1e-10) fail(ErrKind::pole, "hurwitz_zeta: pole at s = 1");
    if (std::abs(s.imag()) > IM_ENVELOPE)
        fail(ErrKind::envelope, "hurwitz_zeta: |Im s| beyond validated envelope 1e3");
    if (s.real() < FAR_LEFT_SIGMA) return hurwitz_far_left(s, a);
    return hurwitz_em(s, a);
}

cplx hurwitz_zeta_any(cplx s, double a) {
    if (!(a > 0.0)) fail(ErrKind::invalid, "hurwitz_zeta_any: need a > 0");
    if (a <= 1.0) return hurwitz_zeta(s, a);
    if (std::abs(s - 1.0) < 1e-10) fail(ErrKind::pole, "hurwitz_zeta_any: pole at s = 1");
    if (std::abs(s.imag()) > IM_ENVELOPE)
        fail(ErrKind::envelope, "hurwitz_zeta_any: |Im s| beyond validated envelope 1e3");
    // leading term a^{-s} below the double range: the whole sum underflows
    if (s.real() * std::log(a) > 744.0) return cplx(0.0, 0.0);
    return hurwitz_em(s, a);
}

cplx riemann_zeta(cplx s) { return hurwitz_zeta(s, 1.0); }

cplx hurwitz_zeta_ds(cplx s, double a) {
    if (!(a > 0.0 && a <= 1.0)) fail(ErrKind::invalid, "hurwitz_zeta_ds: need a in (0, 1]");
    if (std::abs(s - 1.0) < 1e-10) fail(ErrKind::pole, "hurwitz_zeta_ds: pole at s = 1");
    if (s.real() < FAR_LEFT_SIGMA || std::abs(s.imag()) > IM_ENVELOPE)
        fail(ErrKind::envelope, "hurwitz_zeta_ds: outside the supported range");
    const double t = std::abs(s.imag());
    int M = (s.real() >= -1.0)
                ? std::max(30, int(std::ceil(2.0 * t)))
                : std::max({8, int(std::ceil((std::abs(s) + 2.0 * EM_ORDER + 2.0) / 4.5)),
                            int(std::ceil(2.0 * t))});

    // d/ds of the Euler-Maclaurin formula
    std::vector<double> logs(static_cast<size_t>(M)), wl(static_cast<size_t>(M));
    for (int n = 0; n < M; ++n) {
        logs[size_t(n)] = std::log(double(n) + a);
        wl[size_t(n)] = -logs[size_t(n)];
    }
    kern::Terms terms;
    terms.log_a = logs.data();
    terms.w_re = wl.data();
    terms.n = logs.size();
    cplx val = kern::pow_sum(s, 0.0, terms); // sum -(log) (n+a)^{-s}

    const double Ma = double(M) + a;
    const cplx lp = std::log(Ma);
    const cplx T1 = std::exp((1.0 - s) * lp) / (s - 1.0);
    val += -lp * T1 - T1 / (s - 1.0);
    val += -lp * 0.5 * std::exp(-s * lp);

    cplx poch = s;      // (s)_{2k-1}
    cplx dpoch = 1.0;   // d/ds (s)_{2k-1}
    const cplx Ma2 = std::exp(-2.0 * lp);
    cplx p = std::exp(-(s + 1.0) * lp);
    for (int k = 1; k <= EM_ORDER; ++k) {
        val += b2k_over_fact(k) * (dpoch * p + poch * (-lp) * p);
        // advance (s)_{2k-1} -> (s)_{2k+1}
        cplx f1 = s + double(2 * k - 1), f2 = s + double(2 * k);
        dpoch = dpoch * f1 * f2 + poch * (f1 + f2);
        poch *= f1 * f2;
        p *= Ma2;
    }
    return val;
}

namespace {

// zeta(s, a) - 1/(s-1): the pole subtracted inside the Euler-Maclaurin
// formula (stable arbitrarily close to s = 1). Main range only.
cplx hurwitz_reg1(cplx s, double a) {
    const double t = std::abs(s.imag());
    int M = std::max(30, int(std::ceil(2.0 * t)));
    std::vector<double> logs(static_cast<size_t>(M));
    for (int n = 0; n < M; ++n) logs[size_t(n)] = std::log(double(n) + a);
    kern::Terms terms;
    terms.log_a = logs.data();
    terms.n = logs.size();
    cplx val = kern::pow_sum(s, 0.0, terms);

    const double Ma = double(M) + a;
    const cplx lp = std::log(Ma);
    // (M+a)^{1-s}/(s-1) - 1/(s-1) = -lp * expm1((1-s) lp)/((1-s) lp)
    cplx u = (1.0 - s) * lp;
    cplx em1_over_u;
    if (std::abs(u) < 1e-8)
        em1_over_u = 1.0 + u / 2.0;
    else
        em1_over_u = (std::exp(u) - 1.0) / u;
    val += -lp * em1_over_u; // = (e^u - 1)/(s-1)
    val += 0.5 * std::exp(-s * lp);

    cplx poch = s;
    const cplx Ma2 = std::exp(-2.0 * lp);
    cplx p = std::exp(-(s + 1.0) * lp);
    for (int k = 1; k <= EM_ORDER; ++k) {
        val += b2k_over_fact(k) * poch * p;
        poch *= (s + double(2 * k - 1)) * (s + double(2 * k));
        p *= Ma2;
    }
    return val;
}

} // namespace

cplx dirichlet_l(cplx s, const DirichletCharacter& chi) {
    if (chi.q == 1) return riemann_zeta(s);
    if (chi.principal && std::abs(s - 1.0) < 1e-10)
        fail(ErrKind::pole, "dirichlet_l: pole at s = 1 for principal character");
    const bool near_one = std::abs(s - 1.0) < 0.1 && !chi.principal;
    cplx acc = 0.0;
    for (int r = 1; r <= chi.q; ++r) {
        cplx c = chi(r);
        if (c == cplx(0.0, 0.0)) continue;
        double a = double(r) / double(chi.q);
        // for non-principal chi the 1/(s-1) poles cancel across the residues,
        // so near s = 1 sum the regularized values instead
        acc += c * (near_one ? hurwitz_reg1(s, a) : hurwitz_zeta(s, a));
    }
    return std::exp(-s * std::log(double(chi.q))) * acc;
}

cplx fe_zeta_rhs(cplx s) {
    if (std::abs(s - 1.0) < 1e-10) fail(ErrKind::pole, "fe_zeta_rhs: zeta pole at s = 1");
    cplx lg = log_gamma(s) + (1.0 - s) * std::log(2.0) - s * std::log(PI) +
              log_cos_half_pi(s);
    return riemann_zeta(s) * std::exp(lg);
}

cplx fe_l_rhs(cplx s, const DirichletCharacter& chi) {
    if (!chi.primitive)
        fail(ErrKind::hypothesis, "fe_l_rhs: character (q=" + std::to_string(chi.q) +
                                      ", index=" + std::to_string(chi.index) + ") is not primitive");
    if (chi.q == 1) return fe_zeta_rhs(s);
    RootNumber rn = gauss_sum(chi);
    DirichletCharacter chib = conjugate_character(chi);
    cplx lg = log_gamma(s) + (1.0 - s) * std::log(2.0) - s * std::log(PI) +
              (s - 0.5) * std::log(double(chi.q)) + log_cos_half_pi(s - double(chi.kappa));
    return rn.epsilon * dirichlet_l(s, chib) * std::exp(lg);
}

} // namespace mtds
