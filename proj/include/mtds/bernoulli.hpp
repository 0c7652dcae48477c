#ifndef MTDS_BERNOULLI_HPP
#define MTDS_BERNOULLI_HPP

#include <boost/multiprecision/cpp_int.hpp>

namespace mtds {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr int BERNOULLI_MAX = 60;

// n-th Bernoulli number, B_1 = -1/2 convention. Exact. n in [0, BERNOULLI_MAX].
const Rational& bernoulli(int n);

double bernoulli_d(int n);

// B_{2k} / (2k)!  as double, 2k <= BERNOULLI_MAX (Euler-Maclaurin weights).
double b2k_over_fact(int k);

} // namespace mtds

#endif
