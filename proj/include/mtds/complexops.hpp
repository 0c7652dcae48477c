#ifndef MTDS_COMPLEXOPS_HPP
#define MTDS_COMPLEXOPS_HPP

#include <cmath>
#include <complex>
#include <string>

#include "mtds/errors.hpp"

namespace mtds {

using cplx = std::complex<double>;

inline constexpr double PI = 3.14159265358979323846264338327950288;
inline constexpr double TWO_PI = 2.0 * PI;

inline cplx cis(double t) { return {std::cos(t), std::sin(t)}; }

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// A nonzero complex base together with an explicitly declared argument.
// Powers of the base are taken with this argument instead of recomputing
// arg() from the components; bases of the form +-2*pi*i*m carry +-pi/2
// exactly, which is what the functional-equation factors depend on.
struct BranchedBase {
    cplx value;
    double declared_arg;

    explicit BranchedBase(cplx v) : value(v), declared_arg(std::arg(v)) {
        if (v == cplx(0.0, 0.0)) fail(ErrKind::invalid, "BranchedBase: zero base");
    }

    BranchedBase(cplx v, double arg_) : value(v), declared_arg(arg_) {
        if (v == cplx(0.0, 0.0)) fail(ErrKind::invalid, "BranchedBase: zero base");
        double d = std::remainder(arg_ - std::arg(v), TWO_PI);
        if (std::abs(d) > 1e-9)
            fail(ErrKind::invalid, "BranchedBase: declared_arg inconsistent with value");
    }

    // m > 0: the base +-2*pi*i*m style points on the imaginary axis.
    static BranchedBase imag_axis(double m, int sign) {
        if (!(m > 0.0)) fail(ErrKind::invalid, "BranchedBase::imag_axis: need m > 0");
        return BranchedBase(cplx(0.0, sign >= 0 ? m : -m),
                            sign >= 0 ? PI / 2 : -PI / 2);
    }

    static BranchedBase positive_real(double m) {
        if (!(m > 0.0)) fail(ErrKind::invalid, "BranchedBase::positive_real: need m > 0");
        return BranchedBase(cplx(m, 0.0), 0.0);
    }

    double mod() const { return std::abs(value); }
    cplx log() const { return {std::log(std::abs(value)), declared_arg}; }

    // Same ray, modulus scaled by t > 0 (arg preserved exactly).
    BranchedBase scaled(double t) const {
        BranchedBase b(*this);
        b.value *= t;
        return b;
    }
};

// exp(z * (log|base| + i * declared_arg))
inline cplx principal_power(const BranchedBase& base, cplx z) {
    return std::exp(z * base.log());
}

// Power of a positive real base (principal, never wraps).
inline cplx pow_pos(double base, cplx z) {
    return std::exp(z * std::log(base));
}

std::string cplx_to_string(cplx z);          // "a+bi" with %.17g components
cplx cplx_from_string(const std::string& s); // parses "a", "bi", "a+bi", "a-bi"

} // namespace mtds

#endif
