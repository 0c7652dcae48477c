#include "mtds/characters.hpp"

#include <algorithm>
#include <numeric>

#include "mtds/errors.hpp"

namespace mtds {

namespace {

long long pow_mod(long long b, long long e, long long m) {
    long long r = 1 % m;
    b %= m;
    while (e > 0) {
        if (e & 1) r = r * b % m;
        b = b * b % m;
        e >>= 1;
    }
    return r;
}

int multiplicative_order(int a, int m) {
    int r = 1;
    long long x = a % m;
    long long v = x;
    while (v != 1) {
        v = v * x % m;
        ++r;
        if (r > m) fail(ErrKind::invalid, "multiplicative_order: not a unit");
    }
    return r;
}

int primitive_root_odd_prime(int p) {
    int phi = p - 1;
    std::vector<int> primes;
    int n = phi;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            primes.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) primes.push_back(n);
    for (int g = 2; g < p; ++g) {
        bool ok = true;
        for (int pr : primes)
            if (pow_mod(g, phi / pr, p) == 1) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
    fail(ErrKind::invalid, "no primitive root found");
}

// One cyclic component of (Z/qZ)^*: generator g (mod q, via CRT lift) of order n.
struct CyclicFactor {
    long long gen;  // generator as a residue mod q
    int order;
};

// Discrete log of a to base g inside the subgroup generated by g mod m,
// where other components are quotiented out by working with CRT residues.
int dlog_in_component(long long a, long long g, int order, long long q) {
    long long v = 1;
    for (int k = 0; k < order; ++k) {
        if (v == a) return k;
        v = v * g % q;
    }
    fail(ErrKind::invalid, "dlog failed");
}

struct GroupDecomposition {
    int q;
    std::vector<CyclicFactor> factors;
    // per-residue dlog vector (only for gcd(a,q)=1), flattened
    std::vector<std::vector<int>> dlogs; // dlogs[a] has factors.size() entries, or empty
};

long long crt_lift(long long r, long long m, long long q) {
    // x = r (mod m), x = 1 (mod q/m); gcd(m, q/m) = 1
    long long m2 = q / m;
    for (long long x = r % q;; x += m) {
        if (x % m2 == 1 % m2) return x % q;
    }
}

GroupDecomposition decompose(int q) {
    GroupDecomposition G;
    G.q = q;
    std::vector<std::pair<int, int>> pe; // (p, p^e)
    int n = q;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            int pk = 1;
            while (n % d == 0) {
                n /= d;
                pk *= d;
            }
            pe.push_back({d, pk});
        }
    if (n > 1) pe.push_back({n, n});
    std::sort(pe.begin(), pe.end());

    for (auto [p, pk] : pe) {
        if (p == 2) {
            if (pk == 2) continue;          // (Z/2)^* trivial
            if (pk == 4) {
                G.factors.push_back({crt_lift(3, 4, q), 2});
            } else {                        // 2^e, e >= 3: <-1> x <5>
                G.factors.push_back({crt_lift(pk - 1, pk, q), 2});
                G.factors.push_back({crt_lift(5, pk, q), pk / 4});
            }
        } else {
            int g = primitive_root_odd_prime(p);
            if (pk > p && pow_mod(g, p - 1, (long long)p * p) == 1) g += p;
            int ord = pk / p * (p - 1);
            G.factors.push_back({crt_lift(g % pk, pk, q), ord});
        }
    }

    // dlog tables per component: enumerate each component's cyclic orbit and
    // solve a's component by projecting onto it via CRT coordinates.
    // Simpler: brute-force over all exponent tuples once (q is small here).
    G.dlogs.assign(q, {});
    int m = int(G.factors.size());
    std::vector<int> idx(m, 0);
    long long total = 1;
    for (auto& f : G.factors) total *= f.order;
    // enumerate all products of generator powers
    std::vector<long long> val(total);
    std::vector<std::vector<int>> tup(total);
    for (long long t = 0; t < total; ++t) {
        long long rem = t;
        long long v = 1;
        std::vector<int> digits(m);
        for (int i = 0; i < m; ++i) {
            digits[i] = int(rem % G.factors[i].order);
            rem /= G.factors[i].order;
            v = v * pow_mod(G.factors[i].gen, digits[i], q) % q;
        }
        val[t] = v;
        tup[t] = digits;
    }
    for (long long t = 0; t < total; ++t) {
        G.dlogs[size_t(val[t])] = tup[t];
    }
    return G;
}

int gcd_int(int a, int b) { return std::gcd(a, b); }

DirichletCharacter build_character(const GroupDecomposition& G, int index) {
    DirichletCharacter chi;
    chi.q = G.q;
    chi.index = index;
    int m = int(G.factors.size());
    std::vector<int> c(m);
    {
        int rem = index;
        for (int i = 0; i < m; ++i) {
            c[i] = rem % G.factors[i].order;
            rem /= G.factors[i].order;
        }
    }
    long long P = 1;
    for (auto& f : G.factors) P *= f.order;
    if (P == 0 || P > 1'000'000'000LL) fail(ErrKind::invalid, "modulus too large");
    chi.phase_den = int(std::max<long long>(P, 1));
    chi.values.assign(G.q, cplx(0.0, 0.0));
    chi.phase.assign(G.q, -1);
    if (G.q == 1) {
        chi.values = {cplx(1.0, 0.0)};
        chi.phase = {0};
    }
    for (int a = (G.q == 1 ? 1 : 0); a < G.q; ++a) {
        if (G.q == 1) break;
        if (std::gcd(a, G.q) != 1) continue;
        const auto& dl = G.dlogs[a];
        long long k = 0;
        for (int i = 0; i < m; ++i)
            k += (long long)c[i] * dl[i] % P * (P / G.factors[i].order) % P;
        k %= P;
        chi.phase[a] = int(k);
        chi.values[a] = cis(TWO_PI * double(k) / double(P));
        // snap exact rationals of small order
        if (4 * k % P == 0) {
            int quad = int(4 * k / P);
            static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
            chi.values[a] = table[quad];
        }
    }
    // order = lcm_i (order_i / gcd(order_i, c_i))
    long long ord = 1;
    for (int i = 0; i < m; ++i) {
        int oi = G.factors[i].order / gcd_int(G.factors[i].order, c[i]);
        ord = std::lcm(ord, (long long)oi);
    }
    chi.order = int(ord);
    chi.principal = (chi.order == 1);
    chi.kappa = (G.q == 1) ? 0 : (chi.values[(G.q - 1) % G.q].real() > 0 ? 0 : 1);
    // conductor: smallest d | q with chi trivial on {a = 1 mod d, gcd(a,q)=1}
    chi.conductor = chi.q;
    for (int d = 1; d <= G.q; ++d) {
        if (G.q % d != 0) continue;
        bool trivial = true;
        for (int a = 1; a < G.q && trivial; ++a) {
            if (std::gcd(a, G.q) != 1) continue;
            if (a % d == 1 % d && chi.phase[a] != 0) trivial = false;
        }
        if (trivial) {
            chi.conductor = d;
            break;
        }
    }
    chi.primitive = (chi.conductor == chi.q);
    return chi;
}

} // namespace

int euler_phi(int q) {
    int r = q;
    int n = q;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            r -= r / d;
            while (n % d == 0) n /= d;
        }
    if (n > 1) r -= r / n;
    return r;
}

std::vector<DirichletCharacter> characters_mod(int q) {
    if (q < 1) fail(ErrKind::invalid, "characters_mod: q must be >= 1");
    if (q == 1) {
        DirichletCharacter chi;
        chi.q = 1;
        chi.values = {cplx(1.0, 0.0)};
        chi.phase = {0};
        return {chi};
    }
    GroupDecomposition G = decompose(q);
    int phi = euler_phi(q);
    std::vector<DirichletCharacter> out;
    out.reserve(phi);
    for (int idx = 0; idx < phi; ++idx) out.push_back(build_character(G, idx));
    return out;
}

DirichletCharacter character(int q, int index) {
    auto all = characters_mod(q);
    if (index < 0 || index >= int(all.size()))
        fail(ErrKind::config, "character index out of range for q = " + std::to_string(q) +
                                  " (have " + std::to_string(all.size()) + ")");
    return all[size_t(index)];
}

DirichletCharacter conjugate_character(const DirichletCharacter& chi) {
    DirichletCharacter out = chi;
    for (auto& v : out.values) v = std::conj(v);
    for (auto& k : out.phase)
        if (k > 0) k = chi.phase_den - k;
    // recover the conjugate's index: brute match over the group
    auto all = characters_mod(chi.q);
    for (const auto& cand : all)
        if (cand.phase == out.phase) {
            out.index = cand.index;
            break;
        }
    return out;
}

RootNumber gauss_sum(const DirichletCharacter& chi) {
    RootNumber rn;
    cplx tau = 0.0;
    for (int a = 1; a <= chi.q; ++a)
        tau += chi(a) * cis(TWO_PI * double(a) / double(chi.q));
    rn.tau = tau;
    static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    rn.epsilon = tau / (ipow[chi.kappa & 3] * std::sqrt(double(chi.q)));
    return rn;
}

} // namespace mtds
