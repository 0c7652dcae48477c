#include "mtds/bernoulli.hpp"

#include <mutex>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mtds/errors.hpp"

namespace mtds {

namespace {

using boost::multiprecision::cpp_int;
using Float50 = boost::multiprecision::cpp_bin_float_50;

// B_m = -(1/(m+1)) * sum_{k<m} C(m+1,k) B_k
std::vector<Rational> build_table() {
    std::vector<Rational> b(BERNOULLI_MAX + 1);
    b[0] = 1;
    for (int m = 1; m <= BERNOULLI_MAX; ++m) {
        Rational acc = 0;
        cpp_int binom = 1; // C(m+1, 0)
        for (int k = 0; k < m; ++k) {
            acc += Rational(binom) * b[k];
            binom = binom * (m + 1 - k) / (k + 1);
        }
        b[m] = -acc / (m + 1);
    }
    return b;
}

const std::vector<Rational>& table() {
    static const std::vector<Rational> t = build_table();
    return t;
}

double to_double(const Rational& r) {
    Float50 num(boost::multiprecision::numerator(r));
    Float50 den(boost::multiprecision::denominator(r));
    return static_cast<double>(num / den);
}

} // namespace

const Rational& bernoulli(int n) {
    if (n < 0 || n > BERNOULLI_MAX)
        fail(ErrKind::invalid, "bernoulli: n out of range [0, 60], got n = " + std::to_string(n));
    return table()[n];
}

double bernoulli_d(int n) { return to_double(bernoulli(n)); }

double b2k_over_fact(int k) {
    static std::vector<double> cache;
    static std::once_flag once;
    std::call_once(once, [] {
        cache.resize(BERNOULLI_MAX / 2 + 1);
        for (int j = 0; j <= BERNOULLI_MAX / 2; ++j) {
            cpp_int fact = 1;
            for (int i = 2; i <= 2 * j; ++i) fact *= i;
            cache[j] = to_double(bernoulli(2 * j) / Rational(fact));
        }
    });
    if (k < 0 || k > BERNOULLI_MAX / 2)
        fail(ErrKind::invalid, "b2k_over_fact: k out of range");
    return cache[k];
}

} // namespace mtds
