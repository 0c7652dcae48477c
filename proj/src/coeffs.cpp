#include "mtds/coeffs.hpp"

#include <cmath>
#include <sstream>

#include "mtds/errors.hpp"
#include "mtds/zeta.hpp"

namespace mtds {

cplx CoefficientSequence::value(long long n) const {
    switch (kind) {
        case Kind::ones:
            return 1.0;
        case Kind::character:
            return (*chi)(n);
        case Kind::monomial:
            return std::pow(double(n), beta);
        case Kind::finite:
            return (n >= 1 && n <= (long long)finite_vals.size()) ? finite_vals[size_t(n - 1)]
                                                                  : cplx(0.0);
        case Kind::custom:
            return custom_value(n);
    }
    return 0.0;
}

cplx CoefficientSequence::l_eval(cplx s) const {
    switch (kind) {
        case Kind::ones:
            return riemann_zeta(s);
        case Kind::character:
            return dirichlet_l(s, *chi);
        case Kind::monomial:
            return riemann_zeta(s - beta);
        case Kind::finite: {
            cplx acc = 0.0;
            for (size_t j = 0; j < finite_vals.size(); ++j)
                if (finite_vals[j] != cplx(0.0))
                    acc += finite_vals[j] * std::exp(-s * std::log(double(j + 1)));
            return acc;
        }
        case Kind::custom:
            return custom_l(s);
    }
    return 0.0;
}

cplx CoefficientSequence::l_eval_ds(cplx s) const {
    switch (kind) {
        case Kind::ones:
            return hurwitz_zeta_ds(s, 1.0);
        case Kind::character: {
            if (chi->q == 1) return hurwitz_zeta_ds(s, 1.0);
            const double lq = std::log(double(chi->q));
            cplx acc = 0.0, accd = 0.0;
            for (int r = 1; r <= chi->q; ++r) {
                cplx c = (*chi)(r);
                if (c == cplx(0.0)) continue;
                double a = double(r) / double(chi->q);
                acc += c * hurwitz_zeta(s, a);
                accd += c * hurwitz_zeta_ds(s, a);
            }
            cplx qs = std::exp(-s * lq);
            return qs * (accd - lq * acc);
        }
        case Kind::monomial:
            return hurwitz_zeta_ds(s - beta, 1.0);
        case Kind::finite: {
            cplx acc = 0.0;
            for (size_t j = 0; j < finite_vals.size(); ++j)
                if (finite_vals[j] != cplx(0.0)) {
                    double l = std::log(double(j + 1));
                    acc += finite_vals[j] * (-l) * std::exp(-s * l);
                }
            return acc;
        }
        case Kind::custom: {
            // central difference fallback
            const double h = 1e-5;
            return (custom_l(s + h) - custom_l(s - h)) / (2.0 * h);
        }
    }
    return 0.0;
}

cplx CoefficientSequence::pole_constant_term(cplx p0) const {
    // gamma-like constant of the Laurent expansion at a simple pole
    constexpr double EULER_GAMMA = 0.57721566490153286060651209008240;
    switch (kind) {
        case Kind::ones:
            return EULER_GAMMA; // zeta(1+u) = 1/u + gamma + O(u)
        case Kind::monomial:
            return EULER_GAMMA; // zeta(s - beta), pole at 1 + beta
        case Kind::character: {
            if (!chi->principal) fail(ErrKind::invalid, "pole_constant_term: entire L");
            if (chi->q == 1) return EULER_GAMMA;
            // L(s, chi_0) = zeta(s) prod_{p|q} (1 - p^{-s});
            // near s = 1 + u: (1/u + gamma)(P(1) + u P'(1)), so the constant
            // term is P(1) gamma + P'(1), P'(1)/P(1) = sum_{p|q} log p/(p-1).
            double dlogP = 0.0;
            int m = chi->q;
            for (int d = 2; d <= m; ++d) {
                if (m % d == 0) {
                    dlogP += std::log(double(d)) / (double(d) - 1.0);
                    while (m % d == 0) m /= d;
                }
            }
            double res = double(euler_phi(chi->q)) / double(chi->q);
            return res * (EULER_GAMMA + dlogP);
        }
        default:
            fail(ErrKind::invalid, "pole_constant_term: no pole for " + label);
    }
    (void)p0;
}

std::vector<std::pair<cplx, cplx>> CoefficientSequence::poles() const {
    switch (kind) {
        case Kind::ones:
            return {{cplx(1.0), cplx(1.0)}};
        case Kind::character:
            if (chi->principal)
                return {{cplx(1.0), cplx(double(euler_phi(chi->q)) / double(chi->q))}};
            return {};
        case Kind::monomial:
            return {{cplx(1.0 + beta), cplx(1.0)}};
        case Kind::finite:
            return {};
        case Kind::custom:
            return custom_poles;
    }
    return {};
}

double CoefficientSequence::growth_constant() const {
    switch (kind) {
        case Kind::ones:
        case Kind::character:
        case Kind::monomial:
            return 1.0;
        case Kind::finite: {
            double m = 0.0;
            for (auto& v : finite_vals) m = std::max(m, std::abs(v));
            return std::max(m, 1e-300);
        }
        case Kind::custom:
            return 1.0; // declared, not inferred
    }
    return 1.0;
}

CoefficientSequence coeff_ones() { return {}; }

CoefficientSequence coeff_character(const DirichletCharacter& chi) {
    CoefficientSequence c;
    c.kind = CoefficientSequence::Kind::character;
    c.chi = std::make_shared<DirichletCharacter>(chi);
    c.label = "char:" + std::to_string(chi.q) + ":" + std::to_string(chi.index);
    c.alpha = 0.0;
    c.real_valued = (chi.order <= 2);
    c.principal_like = chi.principal;
    return c;
}

CoefficientSequence coeff_monomial(double beta) {
    CoefficientSequence c;
    c.kind = CoefficientSequence::Kind::monomial;
    c.beta = beta;
    c.alpha = beta;
    c.label = "monomial:" + std::to_string(beta);
    c.principal_like = false;
    if (beta == 0.0) {
        c = coeff_ones(); // monomial:0 is ones
    }
    return c;
}

CoefficientSequence coeff_finite(std::vector<cplx> vals) {
    CoefficientSequence c;
    c.kind = CoefficientSequence::Kind::finite;
    c.finite_vals = std::move(vals);
    c.alpha = 0.0;
    c.principal_like = false;
    c.real_valued = true;
    for (auto& v : c.finite_vals)
        if (v.imag() != 0.0) c.real_valued = false;
    std::string s = "finite:[";
    for (size_t j = 0; j < c.finite_vals.size(); ++j) {
        if (j) s += ",";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", c.finite_vals[j].real());
        s += buf;
    }
    c.label = s + "]";
    return c;
}

CoefficientSequence coeff_conjugate(const CoefficientSequence& c) {
    if (c.kind == CoefficientSequence::Kind::character)
        return coeff_character(conjugate_character(*c.chi));
    if (!c.real_valued) fail(ErrKind::invalid, "coeff_conjugate: unsupported for " + c.label);
    return c;
}

CoefficientSequence parse_coeff(const std::string& spec) {
    if (spec == "ones" || spec == "1") return coeff_ones();
    if (spec.rfind("char:", 0) == 0) {
        std::string rest = spec.substr(5);
        auto colon = rest.find(':');
        if (colon == std::string::npos)
            fail(ErrKind::config, "coefficient 'char:q:index' needs two fields: " + spec);
        int q = 0, idx = 0;
        try {
            q = std::stoi(rest.substr(0, colon));
            idx = std::stoi(rest.substr(colon + 1));
        } catch (...) {
            fail(ErrKind::config, "bad character label: " + spec);
        }
        return coeff_character(character(q, idx));
    }
    if (spec.rfind("monomial:", 0) == 0) {
        try {
            return coeff_monomial(std::stod(spec.substr(9)));
        } catch (const Error&) {
            throw;
        } catch (...) {
            fail(ErrKind::config, "bad monomial label: " + spec);
        }
    }
    if (spec.rfind("finite:[", 0) == 0 && spec.back() == ']') {
        std::string body = spec.substr(8, spec.size() - 9);
        std::vector<cplx> vals;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) vals.push_back(cplx_from_string(item));
        if (vals.empty()) fail(ErrKind::config, "finite coefficient list is empty: " + spec);
        return coeff_finite(std::move(vals));
    }
    fail(ErrKind::config, "unknown coefficient label: " + spec +
                              " (expected ones | char:q:index | monomial:beta | finite:[...])");
}

std::vector<CoefficientSequence> parse_coeff_list(const std::string& s, int expect) {
    std::vector<CoefficientSequence> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) {
            // finite:[a,b,c] contains commas; re-join bracketed pieces
            if (item.rfind("finite:[", 0) == 0 && item.back() != ']') {
                std::string acc = item;
                while (acc.back() != ']' && std::getline(ss, item, ',')) acc += "," + item;
                out.push_back(parse_coeff(acc));
            } else {
                out.push_back(parse_coeff(item));
            }
        }
    if (expect > 0 && int(out.size()) != expect)
        fail(ErrKind::config, "expected " + std::to_string(expect) + " coefficient labels, got " +
                                  std::to_string(out.size()));
    return out;
}

} // namespace mtds
