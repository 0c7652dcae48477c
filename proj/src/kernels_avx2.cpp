// AVX2 + FMA variant of the power-sum kernel. This translation unit is the
// only one compiled with -mavx2; it is entered only after the runtime
// dispatcher has checked cpu support.

#include "kernels_impl.hpp"

#if defined(MTDS_X86) && defined(__AVX2__)

#include <immintrin.h>

namespace mtds::kern {

namespace {

// exp for 4 doubles, Cephes-style rational approximation, ~1 ulp on the
// clamped range [-708, 708].
inline __m256d exp_pd(__m256d x) {
    const __m256d hi = _mm256_set1_pd(708.0);
    const __m256d lo = _mm256_set1_pd(-708.0);
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

    x = _mm256_min_pd(x, hi);
    x = _mm256_max_pd(x, lo);

    __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, c1, x);
    r = _mm256_fnmadd_pd(n, c2, r);
    __m256d rr = _mm256_mul_pd(r, r);

    __m256d P = _mm256_set1_pd(1.26177193074810590878e-4);
    P = _mm256_fmadd_pd(P, rr, _mm256_set1_pd(3.02994407707441961300e-2));
    P = _mm256_fmadd_pd(P, rr, _mm256_set1_pd(9.99999999999999999910e-1));
    __m256d xP = _mm256_mul_pd(r, P);

    __m256d Q = _mm256_set1_pd(3.00198505138664455042e-6);
    Q = _mm256_fmadd_pd(Q, rr, _mm256_set1_pd(2.52448340349684104192e-3));
    Q = _mm256_fmadd_pd(Q, rr, _mm256_set1_pd(2.27265548208155028766e-1));
    Q = _mm256_fmadd_pd(Q, rr, _mm256_set1_pd(2.00000000000000000005e0));

    __m256d e = _mm256_div_pd(xP, _mm256_sub_pd(Q, xP));
    e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

    __m128i ni = _mm256_cvtpd_epi32(n);
    __m256i n64 = _mm256_cvtepi32_epi64(ni);
    __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

// sin and cos for 4 doubles. Three-part pi/2 reduction (Cephes DP split);
// adequate for phase magnitudes up to ~1e8.
inline void sincos_pd(__m256d x, __m256d* s_out, __m256d* c_out) {
    const __m256d two_over_pi = _mm256_set1_pd(0.63661977236758134308);
    const __m256d dp1 = _mm256_set1_pd(1.57079632673412561417e0);
    const __m256d dp2 = _mm256_set1_pd(6.07710050650619224932e-11);
    const __m256d dp3 = _mm256_set1_pd(2.02226624879595063154e-21);
    const __m256d sign_mask = _mm256_set1_pd(-0.0);

    __m256d xsign = _mm256_and_pd(x, sign_mask);
    __m256d xa = _mm256_andnot_pd(sign_mask, x);

    __m256d y = _mm256_round_pd(_mm256_mul_pd(xa, two_over_pi),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m128i yi = _mm256_cvtpd_epi32(y);
    __m256i q = _mm256_cvtepi32_epi64(yi);

    __m256d r = _mm256_fnmadd_pd(y, dp1, xa);
    r = _mm256_fnmadd_pd(y, dp2, r);
    r = _mm256_fnmadd_pd(y, dp3, r);
    __m256d rr = _mm256_mul_pd(r, r);

    __m256d sp = _mm256_set1_pd(1.58962301576546568060e-10);
    sp = _mm256_fmadd_pd(sp, rr, _mm256_set1_pd(-2.50507477628578072866e-8));
    sp = _mm256_fmadd_pd(sp, rr, _mm256_set1_pd(2.75573136213857245213e-6));
    sp = _mm256_fmadd_pd(sp, rr, _mm256_set1_pd(-1.98412698295895385996e-4));
    sp = _mm256_fmadd_pd(sp, rr, _mm256_set1_pd(8.33333333332211858878e-3));
    sp = _mm256_fmadd_pd(sp, rr, _mm256_set1_pd(-1.66666666666666307295e-1));
    __m256d psin = _mm256_fmadd_pd(_mm256_mul_pd(r, rr), sp, r);

    __m256d cp = _mm256_set1_pd(-1.13585365213876817300e-11);
    cp = _mm256_fmadd_pd(cp, rr, _mm256_set1_pd(2.08757008419747316778e-9));
    cp = _mm256_fmadd_pd(cp, rr, _mm256_set1_pd(-2.75573141792967388112e-7));
    cp = _mm256_fmadd_pd(cp, rr, _mm256_set1_pd(2.48015872888517179954e-5));
    cp = _mm256_fmadd_pd(cp, rr, _mm256_set1_pd(-1.38888888888730564116e-3));
    cp = _mm256_fmadd_pd(cp, rr, _mm256_set1_pd(4.16666666666665929218e-2));
    __m256d rr2 = _mm256_mul_pd(rr, rr);
    __m256d pcos = _mm256_fmadd_pd(rr2, cp, _mm256_fnmadd_pd(rr, _mm256_set1_pd(0.5),
                                                             _mm256_set1_pd(1.0)));

    const __m256i one = _mm256_set1_epi64x(1);
    const __m256i two = _mm256_set1_epi64x(2);
    __m256d swap = _mm256_castsi256_pd(
        _mm256_cmpeq_epi64(_mm256_and_si256(q, one), one));
    __m256d sflip = _mm256_castsi256_pd(
        _mm256_cmpeq_epi64(_mm256_and_si256(q, two), two));
    __m256d cflip = _mm256_castsi256_pd(
        _mm256_cmpeq_epi64(_mm256_and_si256(_mm256_add_epi64(q, one), two), two));

    __m256d s = _mm256_blendv_pd(psin, pcos, swap);
    __m256d c = _mm256_blendv_pd(pcos, psin, swap);
    s = _mm256_xor_pd(s, _mm256_and_pd(sflip, sign_mask));
    c = _mm256_xor_pd(c, _mm256_and_pd(cflip, sign_mask));
    s = _mm256_xor_pd(s, xsign); // sin is odd; cos is even
    *s_out = s;
    *c_out = c;
}

inline double hsum_ordered(__m256d v) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return ((lane[0] + lane[1]) + lane[2]) + lane[3];
}

} // namespace

bool avx2_compiled_in() { return true; }

void pow_sum_avx2(std::complex<double> sa, std::complex<double> sb, const Terms& t,
                  double out[2]) {
    const __m256d sar = _mm256_set1_pd(sa.real());
    const __m256d sai = _mm256_set1_pd(sa.imag());
    const __m256d sbr = _mm256_set1_pd(sb.real());
    const __m256d sbi = _mm256_set1_pd(sb.imag());
    const __m256d zero = _mm256_setzero_pd();

    __m256d acc_re = zero, acc_im = zero;
    std::size_t j = 0;
    const std::size_t n4 = t.n & ~std::size_t(3);
    for (; j < n4; j += 4) {
        const __m256d la = _mm256_loadu_pd(t.log_a + j);
        __m256d u = _mm256_mul_pd(sar, la);
        __m256d v = _mm256_mul_pd(sai, la);
        if (t.log_b) {
            const __m256d lb = _mm256_loadu_pd(t.log_b + j);
            u = _mm256_fmadd_pd(sbr, lb, u);
            v = _mm256_fmadd_pd(sbi, lb, v);
        }
        const __m256d amp = exp_pd(_mm256_sub_pd(zero, u));
        __m256d sv, cv;
        sincos_pd(v, &sv, &cv);
        __m256d tre = _mm256_mul_pd(amp, cv);
        __m256d tim = _mm256_sub_pd(zero, _mm256_mul_pd(amp, sv));
        if (t.w_re) {
            const __m256d wr = _mm256_loadu_pd(t.w_re + j);
            if (t.w_im) {
                const __m256d wi = _mm256_loadu_pd(t.w_im + j);
                const __m256d re = _mm256_fmsub_pd(tre, wr, _mm256_mul_pd(tim, wi));
                const __m256d im = _mm256_fmadd_pd(tre, wi, _mm256_mul_pd(tim, wr));
                tre = re;
                tim = im;
            } else {
                tre = _mm256_mul_pd(tre, wr);
                tim = _mm256_mul_pd(tim, wr);
            }
        }
        acc_re = _mm256_add_pd(acc_re, tre);
        acc_im = _mm256_add_pd(acc_im, tim);
    }
    out[0] += hsum_ordered(acc_re);
    out[1] += hsum_ordered(acc_im);
    if (j < t.n) {
        Terms rest = t;
        rest.log_a += j;
        if (rest.log_b) rest.log_b += j;
        if (rest.w_re) rest.w_re += j;
        if (rest.w_im) rest.w_im += j;
        rest.n = t.n - j;
        pow_sum_scalar(sa, sb, rest, out);
    }
}

} // namespace mtds::kern

#else

namespace mtds::kern {
// Built without AVX2 support; dispatcher falls back to scalar.
}

#endif
