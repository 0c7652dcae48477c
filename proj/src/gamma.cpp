#include "mtds/gamma.hpp"

#include <cmath>

#include "mtds/bernoulli.hpp"
#include "mtds/errors.hpp"

namespace mtds {

namespace {

constexpr double HALF_LOG_2PI = 0.91893853320467274178032973640562;

// Lanczos, g = 607/128, 15 coefficients (Godfrey's set).
constexpr double LANCZOS_G = 4.7421875;
constexpr double lanczos_c[15] = {
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    3.3994649984811888699e-5,
    4.6523628927048575665e-5,
    -9.8374475304879564677e-5,
    1.5808870322491248884e-4,
    -2.1026444172410488319e-4,
    2.1743961811521264320e-4,
    -1.6431810653676389022e-4,
    8.4418223983852743293e-5,
    -2.6190838401581408670e-5,
    3.6899182659531622704e-6,
};

// Re z >= 0.5, |z| < 16.
cplx log_gamma_lanczos(cplx z) {
    cplx sum = lanczos_c[0];
    for (int k = 1; k < 15; ++k) sum += lanczos_c[k] / (z - 1.0 + double(k));
    cplx t = z + (LANCZOS_G - 0.5);
    return HALF_LOG_2PI + (z - 0.5) * std::log(t) - t + std::log(sum);
}

// Re z >= 0.5, |z| >= 16.
cplx log_gamma_stirling(cplx z) {
    cplx acc = (z - 0.5) * std::log(z) - z + HALF_LOG_2PI;
    cplx zinv = 1.0 / z;
    cplx zpow = zinv;
    cplx z2 = zinv * zinv;
    for (int k = 1; k <= 9; ++k) {
        acc += bernoulli_d(2 * k) / double(2 * k * (2 * k - 1)) * zpow;
        zpow *= z2;
    }
    return acc;
}

cplx log_gamma_right(cplx z) {
    // Re z >= 0.5
    if (std::abs(z) >= 16.0) return log_gamma_stirling(z);
    return log_gamma_lanczos(z);
}

} // namespace

bool near_gamma_pole(cplx z, double band) {
    if (z.real() > 0.5) return false;
    double r = std::round(z.real());
    if (r > 0.0) return false;
    return std::abs(z.real() - r) <= band * std::max(1.0, std::abs(r)) &&
           std::abs(z.imag()) <= band * std::max(1.0, std::abs(r));
}

cplx log_sin_pi(cplx z) {
    if (z.imag() < 0.0) return std::conj(log_sin_pi(std::conj(z)));
    double y = z.imag();
    if (y > 34.0) {
        // sin(pi z) ~ (i/2) e^{-i pi z} for large Im z
        cplx corr = -std::exp(cplx(0.0, 1.0) * (TWO_PI * z)); // -e^{2 pi i z}, tiny
        return std::log(0.5) + cplx(0.0, PI / 2) - cplx(0.0, PI) * z + std::log(1.0 + corr);
    }
    // Kolbig: z = n + eps with Re(eps) in [0,1); unwrap with -i pi n.
    double n = std::floor(z.real());
    cplx eps = z - n;
    return std::log(std::sin(PI * eps)) - cplx(0.0, PI * n);
}

cplx log_gamma(cplx z) {
    if (!finite(z)) fail(ErrKind::invalid, "log_gamma: non-finite argument");
    if (near_gamma_pole(z))
        fail(ErrKind::pole, "log_gamma: pole at z = " + cplx_to_string(z));
    if (z.real() >= 0.5) return log_gamma_right(z);
    // reflection: log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
    return std::log(PI) - log_sin_pi(z) - log_gamma_right(1.0 - z);
}

cplx gamma_fn(cplx z) { return std::exp(log_gamma(z)); }

cplx gamma_ratio(const std::vector<cplx>& numerators, const std::vector<cplx>& denominators) {
    cplx acc = 0.0;
    int i = 0;
    for (const cplx& n : numerators) {
        ++i;
        if (near_gamma_pole(n))
            fail(ErrKind::pole, "gamma_ratio: numerator " + std::to_string(i) +
                                    " at Gamma pole, z = " + cplx_to_string(n));
        acc += log_gamma(n);
    }
    i = 0;
    for (const cplx& d : denominators) {
        ++i;
        if (near_gamma_pole(d))
            fail(ErrKind::pole, "gamma_ratio: denominator " + std::to_string(i) +
                                    " at Gamma pole, z = " + cplx_to_string(d));
        acc -= log_gamma(d);
    }
    return std::exp(acc);
}

cplx pochhammer(cplx a, int k) {
    if (k < 0) fail(ErrKind::invalid, "pochhammer: k must be >= 0");
    cplx p = 1.0;
    for (int j = 0; j < k; ++j) p *= a + double(j);
    return p;
}

cplx digamma(cplx z) {
    if (near_gamma_pole(z)) fail(ErrKind::pole, "digamma: pole at z = " + cplx_to_string(z));
    if (z.real() < 0.5) {
        // psi(z) = psi(1-z) - pi cot(pi z)
        cplx piz = PI * z;
        return digamma(1.0 - z) - PI * std::cos(piz) / std::sin(piz);
    }
    cplx acc = 0.0;
    while (std::abs(z) < 12.0) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    // Stirling: log z - 1/(2z) - sum B_{2k} / (2k z^{2k})
    cplx zinv = 1.0 / z;
    cplx out = std::log(z) - 0.5 * zinv;
    cplx z2 = zinv * zinv;
    cplx p = z2;
    for (int k = 1; k <= 8; ++k) {
        out -= bernoulli_d(2 * k) / double(2 * k) * p;
        p *= z2;
    }
    return out + acc;
}

} // namespace mtds
