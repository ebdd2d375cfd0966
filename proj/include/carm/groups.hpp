#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "carm/arith.hpp"
#include "carm/construction.hpp"

namespace carm {

// An abelian group in invariant-factor form d_1 | d_2 | ... | d_r.
struct GroupSpec {
    FactoredInteger k, M, L;            // modulus parts of (Z/kMLZ)*
    std::vector<Int> invariant_factors;  // ascending, each dividing the next
    Int order{1};
    Int exponent{1};
};

namespace detail {

// Invariant-factor decomposition from a list of cyclic orders: per prime,
// stack the largest prime-power components into the largest factor.
inline std::vector<Int> invariant_factors_from_cyclic(const std::vector<FactoredInteger>& cyclic) {
    std::map<Int, std::vector<unsigned>> exps;  // prime -> exponents, one per component
    size_t rank = 0;
    for (const auto& c : cyclic)
        for (const auto& [p, e] : c.factors) {
            exps[p].push_back(e);
            rank = std::max(rank, exps[p].size());
        }
    for (auto& [p, v] : exps) std::sort(v.begin(), v.end(), std::greater<>());
    std::vector<Int> factors;
    for (size_t i = 0; i < rank; ++i) {
        Int f = 1;
        for (const auto& [p, v] : exps)
            if (i < v.size()) {
                for (unsigned j = 0; j < v[i]; ++j) f *= p;
            }
        factors.push_back(f);
    }
    std::reverse(factors.begin(), factors.end());  // ascending d_1 | d_2 | ...
    return factors;
}

}  // namespace detail

// The group G of residues = 1 (mod k) inside (Z/kMLZ)*, i.e. the kernel of
// reduction to (Z/kZ)*. Needs gcd(L, kM) = 1; k and M may share factors
// (they do whenever M is even, since every k = (p-1)/d is even then). When
// k, M, L are pairwise coprime this is exactly (Z/MLZ)*.
inline GroupSpec group_of(const FactoredInteger& k, const FactoredInteger& M,
                          const FactoredInteger& L) {
    if (k.value < 1 || M.value < 1 || L.value < 1)
        throw domain_error("group_of: modulus parts must be >= 1");
    for (const auto* part : {&k, &M}) {
        Int g;
        mpz_gcd(g.get_mpz_t(), part->value.get_mpz_t(), L.value.get_mpz_t());
        if (g != 1)
            throw domain_error("group_of: L shares factor " + to_decimal(g) + " with " +
                               to_decimal(part->value));
    }

    // Merge the factorizations of k*M*L (k and M may overlap).
    std::map<Int, unsigned> pe;
    std::map<Int, unsigned> k_exp;
    for (const auto& [p, e] : k.factors) { pe[p] += e; k_exp[p] = e; }
    for (const auto& [p, e] : M.factors) pe[p] += e;
    for (const auto& [p, e] : L.factors) pe[p] += e;

    std::vector<FactoredInteger> cyclic;
    auto add_cyclic = [&](const Int& order) {
        if (order > 1) cyclic.push_back(factor(order));
    };
    for (const auto& [p, e] : pe) {
        unsigned f = k_exp.count(p) ? k_exp[p] : 0;  // condition u = 1 (mod p^f)
        if (p == 2) {
            if (e == 1) continue;
            if (f <= 1) {
                // whole 2-part: C2 for e = 2, C2 x C_{2^{e-2}} for e >= 3
                add_cyclic(2);
                if (e >= 3) add_cyclic(Int(1) << (e - 2));
            } else {
                // kernel of units mod 2^e -> mod 2^f is cyclic 2^{e-f} (f >= 2)
                if (e > f) add_cyclic(Int(1) << (e - f));
            }
        } else {
            if (f == 0) {
                Int ord = p - 1;
                for (unsigned i = 1; i < e; ++i) ord *= p;
                add_cyclic(ord);  // (Z/p^e)* is cyclic
            } else if (e > f) {
                Int ord = 1;
                for (unsigned i = f; i < e; ++i) ord *= p;
                add_cyclic(ord);  // kernel is the cyclic p-power part
            }
        }
    }

    GroupSpec G;
    G.k = k;
    G.M = M;
    G.L = L;
    G.invariant_factors = detail::invariant_factors_from_cyclic(cyclic);
    for (const Int& f : G.invariant_factors) G.order *= f;
    if (!G.invariant_factors.empty()) G.exponent = G.invariant_factors.back();

    // #G = phi(kML)/phi(k) and the paper's bounds; violations are bugs.
    Int kML = 1;
    FactoredInteger kml;
    for (const auto& [p, e] : pe) {
        kml.factors.emplace_back(p, e);
        for (unsigned i = 0; i < e; ++i) kML *= p;
    }
    kml.value = kML;
    if (G.order * euler_phi(k) != euler_phi(kml))
        throw error("group_of: internal order mismatch");
    if (G.order > M.value * L.value) throw error("group_of: #G > ML");
    if (G.exponent > M.value * carmichael_lambda(L)) throw error("group_of: lambda(G) > M*lambda(L)");
    return G;
}

// (lambda(G), lambda(G) * (1 + ln #G)) — the elementary Davenport bracket.
struct DavenportBounds {
    Int lower;
    double upper = 0;
};

inline DavenportBounds davenport_bounds(const GroupSpec& G) {
    DavenportBounds b;
    b.lower = G.exponent;
    b.upper = mpz_get_d(G.exponent.get_mpz_t()) * (1.0 + (G.order > 1 ? ln_mpz(G.order) : 0.0));
    return b;
}

// ---------------------------------------------------------------------------
// Exact Davenport constant for small groups

struct DavenportExact {
    unsigned value = 1;
    std::vector<std::vector<unsigned>> certificate;  // zero-sum-free sequence, length value-1
};

// Re-check a certificate: no nonempty subsequence multiplies to the identity.
// Group order must be <= 64 (same range as davenport_exact).
inline bool is_zero_sum_free(const std::vector<unsigned>& invariant_factors,
                             const std::vector<std::vector<unsigned>>& seq) {
    size_t r = invariant_factors.size();
    uint64_t order = 1;
    for (unsigned f : invariant_factors) order *= f;
    if (order > 64) throw budget_error("is_zero_sum_free: group order exceeds 64");
    auto index_of = [&](const std::vector<unsigned>& v) {
        uint64_t idx = 0;
        for (size_t j = r; j-- > 0;) idx = idx * invariant_factors[j] + v[j] % invariant_factors[j];
        return idx;
    };
    uint64_t sums = 0;  // bitmask of achievable nonempty subsequence sums
    for (const auto& g : seq) {
        if (g.size() != r) return false;
        uint64_t gi = index_of(g);
        uint64_t shifted = 0, s = sums;
        while (s) {
            uint64_t i = static_cast<uint64_t>(std::countr_zero(s));
            s &= s - 1;
            // index arithmetic: decode, add, re-encode
            std::vector<unsigned> v(r);
            uint64_t t = i;
            for (size_t j = 0; j < r; ++j) {
                v[j] = static_cast<unsigned>((t % invariant_factors[j] + g[j]) % invariant_factors[j]);
                t /= invariant_factors[j];
            }
            shifted |= uint64_t{1} << index_of(v);
        }
        sums |= shifted | (uint64_t{1} << gi);
        if (sums & 1) return false;
    }
    return true;
}

// Exhaustive Davenport constant, #G <= 64. DFS over nondecreasing sequences,
// memoized on the achievable-subsequence-sum bitmask. Also emits a longest
// zero-sum-free sequence as an independently checkable certificate.
inline DavenportExact davenport_exact(const GroupSpec& G) {
    if (G.order > 64) throw budget_error("davenport_exact: group order exceeds 64");
    unsigned n = static_cast<unsigned>(to_u64(G.order));
    std::vector<unsigned> invs;
    for (const Int& f : G.invariant_factors) invs.push_back(static_cast<unsigned>(to_u64(f)));

    DavenportExact result;
    if (n == 1) return result;  // D(trivial) = 1, empty certificate

    // element index <-> coordinate vectors, plus an addition table
    size_t r = invs.size();
    std::vector<std::vector<unsigned>> coords(n, std::vector<unsigned>(r));
    for (unsigned idx = 1; idx < n; ++idx) {
        coords[idx] = coords[idx - 1];
        for (size_t j = 0; j < r; ++j) {
            if (++coords[idx][j] < invs[j]) break;
            coords[idx][j] = 0;
        }
    }
    std::vector<std::vector<uint8_t>> add(n, std::vector<uint8_t>(n));
    auto index_of = [&](const std::vector<unsigned>& v) {
        unsigned idx = 0;
        for (size_t j = r; j-- > 0;) idx = idx * invs[j] + v[j];
        return idx;
    };
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j) {
            std::vector<unsigned> s(r);
            for (size_t t = 0; t < r; ++t) s[t] = (coords[i][t] + coords[j][t]) % invs[t];
            add[i][j] = static_cast<uint8_t>(index_of(s));
        }

    struct Key {
        uint64_t sums;
        unsigned gmin;
        bool operator==(const Key& o) const { return sums == o.sums && gmin == o.gmin; }
    };
    struct KeyHash {
        size_t operator()(const Key& k) const {
            return std::hash<uint64_t>{}(k.sums * 1000003u + k.gmin);
        }
    };
    struct Entry {
        unsigned best;
        unsigned move;  // element extending an optimal sequence, or n if none
    };
    std::unordered_map<Key, Entry, KeyHash> memo;

    // best additional zero-sum-free length from achievable-sum set `sums`
    // using elements >= gmin
    auto dfs = [&](auto&& self, uint64_t sums, unsigned gmin) -> Entry {
        Key key{sums, gmin};
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        Entry e{0, n};
        for (unsigned g = gmin; g < n; ++g) {
            uint64_t shifted = 0;
            uint64_t s = sums;
            while (s) {
                unsigned i = static_cast<unsigned>(std::countr_zero(s));
                s &= s - 1;
                shifted |= uint64_t{1} << add[i][g];
            }
            uint64_t next = sums | shifted | (uint64_t{1} << g);
            if (next & 1) continue;  // a subsequence hit the identity
            Entry sub = self(self, next, g);
            if (1 + sub.best > e.best) {
                e.best = 1 + sub.best;
                e.move = g;
            }
        }
        memo.emplace(key, e);
        return e;
    };

    Entry top = dfs(dfs, 0, 1);
    result.value = top.best + 1;

    // reconstruct certificate by replaying stored moves
    uint64_t sums = 0;
    unsigned gmin = 1;
    while (true) {
        Entry e = memo.at(Key{sums, gmin});
        if (e.move >= n) break;
        result.certificate.push_back(coords[e.move]);
        uint64_t shifted = 0, s = sums;
        while (s) {
            unsigned i = static_cast<unsigned>(std::countr_zero(s));
            s &= s - 1;
            shifted |= uint64_t{1} << add[i][e.move];
        }
        sums |= shifted | (uint64_t{1} << e.move);
        gmin = e.move;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Baker–Schmidt threshold bound

struct BakerSchmidtBound {
    double value = 0;     // 5 lambda^2 Omega(#G) ln(3 lambda Omega(#G))
    double value_ln = 0;
    std::optional<bool> le_e3y;  // value <= e^{3y}, when y is supplied
};

inline BakerSchmidtBound baker_schmidt_s(const GroupSpec& G, std::optional<double> y = std::nullopt) {
    if (G.order < 2) throw domain_error("baker_schmidt_s: group must be nontrivial");
    unsigned Om = big_omega(factor(G.order));
    double ln_lam = ln_mpz(G.exponent);
    double inner = std::log(3.0) + ln_lam + std::log(static_cast<double>(Om));
    BakerSchmidtBound b;
    b.value_ln = std::log(5.0) + 2.0 * ln_lam + std::log(static_cast<double>(Om)) + std::log(inner);
    b.value = std::exp(b.value_ln);
    if (y) b.le_e3y = b.value_ln <= 3.0 * *y;
    return b;
}

// ---------------------------------------------------------------------------
// Subsequence-product count N

struct CountN {
    double log_N = 0;           // ln of binom(P-n, t-n) / binom(P-n, n)
    double chain_lower_ln = 0;  // ln of the weaker chain bound P^{t-2n} t^{-t}
};

inline double log_binomial(double a, double b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
}

inline CountN count_N(uint64_t pool_size, uint64_t n_G, uint64_t t) {
    if (!(n_G >= 1 && t > n_G && pool_size > t))
        throw domain_error("count_N: need pool_size > t > n_G >= 1");
    if (pool_size - n_G < n_G)
        throw domain_error("count_N: pool_size < 2*n_G leaves the denominator binomial empty");
    double P = static_cast<double>(pool_size);
    double n = static_cast<double>(n_G);
    double td = static_cast<double>(t);
    CountN c;
    c.log_N = log_binomial(P - n, td - n) - log_binomial(P - n, n);
    c.chain_lower_ln = (td - 2.0 * n) * std::log(P) - td * std::log(td);
    return c;
}

// ---------------------------------------------------------------------------
// Exponent trick: lift a pool prime into the target class

struct ExponentLift {
    Int m;
    bool check = false;
};

// Smallest m with m = 1 (mod phi(M)) and m = 0 (mod lambda(L)/2); then
// p0^m = 1 (mod L) (p0 is a QR mod L) and p0^m = a (mod M).
inline ExponentLift exponent_lift(const Int& p0, const Int& a, const FactoredInteger& M,
                                  const FactoredInteger& L) {
    Int lam = carmichael_lambda(L);
    if (lam % 2 != 0) throw domain_error("exponent_lift: lambda(L) is odd; L has no odd prime factor");
    Int half = lam / 2;
    Int phiM = euler_phi(M);
    Int g;
    mpz_gcd(g.get_mpz_t(), half.get_mpz_t(), phiM.get_mpz_t());
    if (g != 1)
        throw domain_error("exponent_lift: gcd(lambda(L)/2, phi(M)) = " + to_decimal(g) +
                           " != 1; L is mis-sieved for this M");
    if (!is_qr_mod_squarefree(p0, L))
        throw domain_error("exponent_lift: p0 is not a quadratic residue mod L");
    Int am, pm;
    mpz_mod(am.get_mpz_t(), a.get_mpz_t(), M.value.get_mpz_t());
    mpz_mod(pm.get_mpz_t(), p0.get_mpz_t(), M.value.get_mpz_t());
    if (pm != am) throw domain_error("exponent_lift: p0 is not in the class a (mod M)");
    Congruence c = crt_combine({Congruence(1, phiM), Congruence(0, half)});
    ExponentLift out;
    out.m = c.residue == 0 ? c.modulus : c.residue;
    out.check = mod_pow(p0, out.m, L.value) == 1 && mod_pow(p0, out.m, M.value) == am;
    return out;
}

// ---------------------------------------------------------------------------
// Bound bookkeeping for a pipeline run

struct BoundsReport {
    double y = 0;
    uint64_t pi_y = 0;
    Int n_lower;            // lambda(G)
    double n_upper = 0;     // lambda(G)(1 + ln #G)
    double eq6_ln = 0;      // ln(M (y ln^2 y)^{pi(y)} ln(ML))
    double e2y_ln = 0;      // 2y
    bool eq6_le_e2y = false;
    Int lambda_L;
    Int lambda_L_bound;     // floor(y ln^2 y)^{pi(y)}
    bool lambda_ok = false;  // lambda(L) <= bound, exact
    double s_ln = 0;        // ln of the Baker-Schmidt bound for G
    bool s_le_e3y = false;
    double t_ln = 0;        // ln ceil(e^{3y}) = 3y
    double log_x = 0;
    double log_X = 0;       // t * ln x
    std::optional<CountN> N;     // only when pool_size > t > n(G) is satisfiable
    std::string N_unavailable_reason;
};

inline BoundsReport bounds_report(const ConstructionContext& ctx, const GroupSpec& G,
                                  const PrimePool& pool) {
    if (ctx.toy_L) throw domain_error("bounds_report: requires a sieve-mode context (y is undefined for toy L)");
    BoundsReport r;
    r.y = ctx.y;
    r.pi_y = primes_in(0, static_cast<uint64_t>(std::floor(ctx.y))).size();
    DavenportBounds db = davenport_bounds(G);
    r.n_lower = db.lower;
    r.n_upper = db.upper;

    double lny = std::log(ctx.y);
    double y_ln2y = ctx.y * lny * lny;
    double ln_ML = ln_mpz(ctx.M) + ln_mpz(ctx.L.value);
    r.eq6_ln = ln_mpz(ctx.M) + static_cast<double>(r.pi_y) * std::log(y_ln2y) + std::log(ln_ML);
    r.e2y_ln = 2.0 * ctx.y;
    r.eq6_le_e2y = r.eq6_ln <= r.e2y_ln;

    r.lambda_L = carmichael_lambda(ctx.L);
    Int base(static_cast<unsigned long>(static_cast<uint64_t>(std::floor(y_ln2y))));
    mpz_pow_ui(r.lambda_L_bound.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(r.pi_y));
    r.lambda_ok = r.lambda_L <= r.lambda_L_bound;

    BakerSchmidtBound s = baker_schmidt_s(G, ctx.y);
    r.s_ln = s.value_ln;
    r.s_le_e3y = s.le_e3y.value_or(false);

    r.t_ln = 3.0 * ctx.y;
    r.log_x = ctx.log_x;
    r.log_X = std::exp(r.t_ln) * ctx.log_x;

    // N needs pool_size > t > n(G); at desk scale t = ceil(e^{3y}) dwarfs any
    // real pool, so this mostly records why the count is out of reach.
    double n_G = db.upper;  // paper uses n(G); its computable upper bound stands in
    if (r.t_ln <= std::log(1e18) && static_cast<double>(pool.primes.size()) > std::exp(r.t_ln) &&
        std::exp(r.t_ln) > n_G) {
        r.N = count_N(pool.primes.size(), static_cast<uint64_t>(n_G),
                      static_cast<uint64_t>(std::exp(r.t_ln)));
    } else {
        r.N_unavailable_reason = "pool size " + std::to_string(pool.primes.size()) +
                                 " does not exceed t (ln t = " + std::to_string(r.t_ln) + ")";
    }
    return r;
}

}  // namespace carm
