#ifndef MTDS_COEFFS_HPP
#define MTDS_COEFFS_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mtds/characters.hpp"
#include "mtds/complexops.hpp"

namespace mtds {

// A coefficient sequence a(n) together with its declared growth exponent,
// its continued one-variable Dirichlet series L(s) = sum a(n) n^{-s}, and
// the (finite) pole list of that series. The CLI vocabulary is
//   "ones" | "char:q:index" | "monomial:beta" | "finite:[c1,...,cm]".
struct CoefficientSequence {
    enum class Kind { ones, character, monomial, finite, custom };

    std::string label = "ones";
    Kind kind = Kind::ones;
    double alpha = 0.0;      // declared growth exponent
    bool real_valued = true;
    bool principal_like = true; // ones or principal character (singular-locus input)

    std::shared_ptr<DirichletCharacter> chi; // kind == character
    double beta = 0.0;                       // kind == monomial
    std::vector<cplx> finite_vals;           // kind == finite, a(j) = finite_vals[j-1]

    // kind == custom
    std::function<cplx(long long)> custom_value;
    std::function<cplx(cplx)> custom_l;
    std::vector<std::pair<cplx, cplx>> custom_poles;

    cplx value(long long n) const;
    cplx l_eval(cplx s) const;
    // d/ds of l_eval (log-weighted Dirichlet series), continued
    cplx l_eval_ds(cplx s) const;
    // simple poles of l_eval as (location, residue)
    std::vector<std::pair<cplx, cplx>> poles() const;
    // constant term of l_eval(p0 + u) = res/u + c0 + O(u) at the pole p0
    cplx pole_constant_term(cplx p0) const;
    // max |a(n)| / n^alpha over the support (crude constant for tail bounds)
    double growth_constant() const;
};

CoefficientSequence coeff_ones();
CoefficientSequence coeff_character(const DirichletCharacter& chi);
CoefficientSequence coeff_monomial(double beta);
CoefficientSequence coeff_finite(std::vector<cplx> vals);
CoefficientSequence coeff_conjugate(const CoefficientSequence& c);

CoefficientSequence parse_coeff(const std::string& spec);
std::vector<CoefficientSequence> parse_coeff_list(const std::string& comma_separated, int expect);

} // namespace mtds

#endif
