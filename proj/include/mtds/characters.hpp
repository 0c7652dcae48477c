#ifndef MTDS_CHARACTERS_HPP
#define MTDS_CHARACTERS_HPP

#include <vector>

#include "mtds/complexops.hpp"

namespace mtds {

// A Dirichlet character mod q. Values are exact roots of unity, stored both
// as complex numbers and as integer phases k with chi(a) = e^{2 pi i k / P}
// (P = phi(q)), so multiplicativity holds at integer level.
//
// Characters are addressed externally by (q, index); the index enumerates
// mixed-radix tuples over the cyclic decomposition of (Z/qZ)^*, prime-power
// factors ascending, so the labeling is stable across runs. Index 0 is the
// principal character.
struct DirichletCharacter {
    int q = 1;
    int index = 0;
    std::vector<cplx> values;  // size q, indexed by residue; 0 where gcd > 1
    std::vector<int> phase;    // e^{2 pi i phase[a] / phase_den}; -1 where gcd > 1
    int phase_den = 1;
    bool primitive = true;
    bool principal = true;
    int kappa = 0;      // 0 even, 1 odd
    int conductor = 1;
    int order = 1;

    cplx operator()(long long n) const {
        int r = int(((n % q) + q) % q);
        return values[r];
    }
};

std::vector<DirichletCharacter> characters_mod(int q);

// Fetch one character by its stable (q, index) label.
DirichletCharacter character(int q, int index);

DirichletCharacter conjugate_character(const DirichletCharacter& chi);

struct RootNumber {
    cplx tau;      // Gauss sum, by the defining q-term sum
    cplx epsilon;  // tau / (i^kappa sqrt(q))
};

RootNumber gauss_sum(const DirichletCharacter& chi);

int euler_phi(int q);

} // namespace mtds

#endif
