#ifndef MTDS_MT_SERIES_HPP
#define MTDS_MT_SERIES_HPP

#include <vector>

#include "mtds/coeffs.hpp"
#include "mtds/complexops.hpp"

namespace mtds {

// A depth-r argument tuple (s_1, ..., s_r, s_{r+1}).
struct MtPoint {
    int r = 2;
    std::vector<cplx> s;

    MtPoint() = default;
    MtPoint(int r_, std::vector<cplx> s_) : r(r_), s(std::move(s_)) {}
};

struct SeriesTruncation {
    std::vector<long long> caps; // per-index caps actually reached
    double tail_bound = 0.0;     // bound on everything not summed explicitly
    long long terms_used = 0;
};

struct RegionCheck {
    bool ok = false;
    std::vector<int> worst_subset; // 1-based indices into s_1..s_r
    double worst_margin = 0.0;     // min over subsets of (sum - |J|)
};

// Absolute-convergence test: for every nonempty J subset of {1..r},
// sum_{j in J} (sigma_j - alpha_j) + sigma_{r+1} > |J|.
RegionCheck in_convergence_region(const MtPoint& p, const std::vector<double>& alphas);

struct MtResult {
    cplx value;
    SeriesTruncation trunc;
};

struct MtBudget {
    long long max_terms = 100'000'000;
};

// Direct lexicographic summation with per-index caps; the innermost index is
// completed analytically through the tails of the coefficient's L-series,
// and at depth 2 the outer tail is completed through the Barnes residue
// expansion of the inner sum. tol is an absolute tail target; refuses
// (region/budget) rather than under-reporting.
MtResult mt_direct(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, double tol,
                   const MtBudget& budget = {});

// sum_{n | gcd(l)} n^b outer_1(l_1/n)...outer_k(l_k/n) conv_slot(n)
cplx convolved_coefficient(cplx b, const CoefficientSequence& conv_slot,
                           const std::vector<CoefficientSequence>& outer,
                           const std::vector<long long>& l);

// sum over d_j | l_j with d_j >= l_j/gcd(l) of d_1^{s_1}...d_k^{s_k}(sum d)^{s_{k+1}};
// svals has k+1 entries for k moduli.
cplx sigma_mt(const std::vector<cplx>& svals, const std::vector<long long>& l);

struct FSeriesResult {
    cplx value;
    SeriesTruncation trunc;
};

// F_x^{sign}: the Psi-weighted gcd-convolution series over (r-1) indices,
// exact Psi heads plus analytic tail completion (asymptotic k-terms summed
// through L-function tails, remainder bounded by the explicit rho_N shape).
FSeriesResult f_series(double x, const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                       int sign, double tol);

// Continuation expansion of F_x^{sign}: N asymptotic k-terms evaluated
// globally through L-series products plus the rho_N-weighted remainder
// series (rho_N by contour-minus-partial route difference).
cplx f_series_continued(double x, const MtPoint& p,
                        const std::vector<CoefficientSequence>& coeffs, int sign, int N,
                        double tol);

// Barnes-integral recursion on the last index, contour (c_absc) inside the
// validity window; base case r = 1 needs no quadrature.
cplx mt_via_mb(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, double c_absc,
               double T = 0.0, double h = 0.0);

// Continuation of the Barnes recursion: contour shifted right to
// Re z = M - 1/2 with Gamma(-z) and L-pole residues collected; evaluates the
// continued series off its singular set. M <= 0 selects M automatically.
cplx mt_continued(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, int M = 0,
                  double tol = 1e-10);

// mt_direct when the region margins allow, mt_continued otherwise.
cplx mt_eval_auto(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs, double tol);

// zeta_MT,r(s) - Gamma(1-s_r)Gamma(s_r+s_{r+1}-1)/Gamma(s_{r+1})
//   * zeta_MT,r-1(s_1..s_{r-1}, s_r+s_{r+1}-1), all-ones coefficients.
cplx g_modified(const MtPoint& p, double tol = 1e-10);

// Same subtraction for general coefficient tuples (last slot ones).
cplx big_g_modified(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                    double tol = 1e-10);

// True when the direct Psi-series defining F_x converges absolutely with
// workable margins at p (the f_series precondition).
bool f_series_admissible(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs);

// Smallest N accepted by f_series_continued at p (plus a little headroom).
int f_continued_min_n(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs);

} // namespace mtds

#endif
