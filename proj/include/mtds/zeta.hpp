#ifndef MTDS_ZETA_HPP
#define MTDS_ZETA_HPP

#include "mtds/characters.hpp"
#include "mtds/complexops.hpp"

namespace mtds {

// Hurwitz zeta(s, a), a in (0,1], continued to all s != 1.
// Euler-Maclaurin in the main range; Hurwitz's formula (periodic zeta
// series) for Re s below the cancellation cliff. Accuracy envelope:
// |Im s| <= 1e3; relative ~1e-12 for Re s >= -6, degrading gracefully
// further left through the series route.
cplx hurwitz_zeta(cplx s, double a);

cplx riemann_zeta(cplx s);

// d/ds zeta(s, a), same envelope as hurwitz_zeta but main range only
// (Re s >= -6); used by log-weighted tail completions.
cplx hurwitz_zeta_ds(cplx s, double a);

// zeta(s, a) for arbitrary a > 0 (not just (0,1]); with a large this is the
// cancellation-free way to evaluate Dirichlet-series tails
// sum_{m > L} m^{-s} = zeta(s, L+1).
cplx hurwitz_zeta_any(cplx s, double a);

// L(s, chi) = q^{-s} sum_a chi(a) zeta(s, a/q); entire for non-principal chi.
cplx dirichlet_l(cplx s, const DirichletCharacter& chi);

// Right-hand side of zeta(1-s) = zeta(s) 2^{1-s} pi^{-s} Gamma(s) cos(pi s/2).
cplx fe_zeta_rhs(cplx s);

// Right-hand side of
// L(1-s,chi) = eps(chi) L(s,conj chi) 2^{1-s} pi^{-s} q^{s-1/2} Gamma(s) cos(pi(s-kappa)/2),
// chi primitive.
cplx fe_l_rhs(cplx s, const DirichletCharacter& chi);

} // namespace mtds

#endif
