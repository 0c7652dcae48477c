#ifndef MTDS_PSI_HPP
#define MTDS_PSI_HPP

#include <string>

#include "mtds/complexops.hpp"

namespace mtds {

struct PsiParams {
    std::string route;        // integral | mellin_barnes | asymptotic | reflected
    double phi = 0.0;         // integral: ray angle
    long long nodes = 0;      // integral: node count of the richer pass
    double gamma_absc = 0.0;  // mellin-barnes: contour abscissa
    double T = 0.0, h = 0.0;  // mellin-barnes: height and step
    int collected = 0;        // mellin-barnes: left poles collected as residues
    int N = 0;                // asymptotic: expansion length
    bool exact_terminating = false;
    bool heuristic_bound = true;
    std::string inner_route;  // for route == "reflected"
};

struct PsiEvaluation {
    cplx value;
    PsiParams params;
    double error_bound = 0.0; // absolute
};

// Kummer/Tricomi Psi(a,c;x) by the rotated-ray integral representation,
// Re a > 0, -pi < phi < pi, |phi + arg x| < pi/2. Nodes = trapezoid count;
// the error estimate comes from node doubling.
PsiEvaluation psi_integral(cplx a, cplx c, const BranchedBase& x, double phi, long long nodes);

// Barnes-integral route on the vertical line Re z = gamma_absc,
// -Re a < gamma < min(0, 1 - Re c), -3pi/2 < arg x < 3pi/2.
PsiEvaluation psi_mellin_barnes(cplx a, cplx c, const BranchedBase& x, double gamma_absc,
                                double T, double h);

// Same contour route with the abscissa auto-tuned; when the plain window is
// empty the contour is pushed left past poles of Gamma(a+z) and their
// residues (the leading asymptotic terms) are added back.
PsiEvaluation psi_mellin_barnes_auto(cplx a, cplx c, const BranchedBase& x);

// Truncated large-|x| expansion sum_{k<N} (-1)^k (a)_k (a-c+1)_k / k! x^{-a-k}
// with the explicit remainder-shape bound (unknown absolute constant taken
// as 1, so the bound is flagged heuristic).
PsiEvaluation psi_asymptotic(cplx a, cplx c, const BranchedBase& x, int N);

double psi_asym_bound(cplx a, cplx c, double abs_x, int N);
int psi_best_N(cplx a, cplx c, double abs_x, double* bound_out, int n_lo = 1, int n_hi = 40);

struct PsiReflection {
    cplx a, c;      // (a - c + 1, 2 - c)
    cplx prefactor; // x^{1-c}
};
PsiReflection psi_reflect(cplx a, cplx c, const BranchedBase& x);

// Route selector: asymptotic when |x| >= 4 pi and its bound meets rel_tol,
// else contour route (reflecting and/or collecting residues as needed),
// integral as a last resort for Re a > 0.
PsiEvaluation psi(cplx a, cplx c, const BranchedBase& x, double rel_tol = 1e-10);

// Contour-quality value regardless of |x| (never the asymptotic route);
// used where a route difference against the partial sum is needed.
PsiEvaluation psi_contour_quality(cplx a, cplx c, const BranchedBase& x);

} // namespace mtds

#endif
