#ifndef MTDS_GAMMA_HPP
#define MTDS_GAMMA_HPP

#include <vector>

#include "mtds/complexops.hpp"

namespace mtds {

// True when z is within `band` of a non-positive integer (a Gamma pole).
bool near_gamma_pole(cplx z, double band = 1e-12);

// Principal branch of log Gamma(z). Lanczos for moderate |z| in the right
// half-plane, Stirling beyond, reflection (with Kolbig's log-sin) on the left.
cplx log_gamma(cplx z);

cplx gamma_fn(cplx z);

// exp(sum log Gamma(num) - sum log Gamma(den)); overflow-safe for ratios.
cplx gamma_ratio(const std::vector<cplx>& numerators, const std::vector<cplx>& denominators);

// Rising factorial (a)_k as a plain product; fine at Gamma poles of a.
cplx pochhammer(cplx a, int k);

// log(sin(pi z)) on the branch that keeps log_gamma principal (Kolbig).
cplx log_sin_pi(cplx z);

// Digamma psi(z), reflection + recurrence + Stirling.
cplx digamma(cplx z);

} // namespace mtds

#endif
