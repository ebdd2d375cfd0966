#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "carm/arith.hpp"
#include "carm/parallel.hpp"
#include "carm/sieve.hpp"

namespace carm {

// Pipeline state: the sieved prime set, L, and ln x with
// x = M^{1/B} * prod q^{1/B}. Bounds involving x live in log space; the
// comparator log_le below is the single arbiter wherever they are tested.
struct ConstructionContext {
    Int a;
    Int M;
    double B = 0;
    double y = 0;  // NaN when L was supplied directly
    FactoredInteger L;
    std::vector<uint64_t> L_primes;
    double log_x = 0;
    std::optional<uint64_t> p_cap;
    bool toy_L = false;
    std::optional<SmoothPrimeSet> Q;

    bool has_sieve() const { return !toy_L; }
};

inline bool log_le(double ln_lhs, double ln_rhs) { return ln_lhs <= ln_rhs + 1e-9; }

namespace detail {

inline void check_context_common(const Int& a, const Int& M, double B, const FactoredInteger& L) {
    Int g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), M.get_mpz_t());
    if (g != 1) throw domain_error("make_context: gcd(a, M) = " + to_decimal(g) + " != 1");
    if (!(B > 0.0 && B < 5.0 / 12.0)) throw domain_error("make_context: B must lie strictly in (0, 5/12)");
    for (const auto& [p, e] : factor(M).factors) {
        (void)e;
        if (mpz_divisible_p(L.value.get_mpz_t(), p.get_mpz_t()))
            throw domain_error("make_context: prime " + to_decimal(p) + " of M divides L");
    }
}

}  // namespace detail

inline ConstructionContext make_context(const Int& a, const Int& M, double B, double y,
                                        std::optional<uint64_t> p_cap = std::nullopt,
                                        const std::vector<Int>& exclusions = {},
                                        unsigned workers = 0) {
    SieveContext sc = SieveContext::make(a, M, B, y, exclusions);
    SmoothPrimeSet Q = exclude_exceptional(build_Q0(sc, workers), exclusions);
    if (Q.primes.empty())
        throw empty_sieve_error("make_context: sieve produced no primes at y = " + std::to_string(y));
    ConstructionContext ctx;
    ctx.a = a;
    ctx.M = M;
    ctx.B = B;
    ctx.y = y;
    ctx.L = build_L(Q);
    ctx.L_primes = Q.primes;
    ctx.p_cap = p_cap;
    ctx.Q = std::move(Q);
    detail::check_context_common(a, M, B, ctx.L);
    ctx.log_x = (ln_mpz(M) + ln_mpz(ctx.L.value)) / B;
    return ctx;
}

// Toy override: run the pipeline below an explicit L, bypassing the sieve.
// This is how most small worked cases are exercised.
inline ConstructionContext make_context_with_L(const Int& a, const Int& M, double B,
                                               const FactoredInteger& L,
                                               std::optional<uint64_t> p_cap = std::nullopt) {
    if (!L.squarefree() || L.value < 3 || L.value % 2 == 0)
        throw domain_error("make_context_with_L: L must be odd, squarefree, > 1");
    detail::check_context_common(a, M, B, L);
    ConstructionContext ctx;
    ctx.a = a;
    ctx.M = M;
    ctx.B = B;
    ctx.y = std::numeric_limits<double>::quiet_NaN();
    ctx.L = L;
    for (const auto& [q, e] : L.factors) {
        (void)e;
        ctx.L_primes.push_back(to_u64(q));
    }
    ctx.p_cap = p_cap;
    ctx.toy_L = true;
    ctx.log_x = (ln_mpz(M) + ln_mpz(L.value)) / B;
    return ctx;
}

// One admissible pair: p = dk + 1 with d | L, p = a (mod M), p a quadratic
// residue mod L/d, gcd(k, L) = 1, p within the cap.
struct PrimePair {
    uint64_t p = 0;
    uint64_t d = 0;
    uint64_t k = 0;
};

struct PairEnumOptions {
    uint64_t scan_limit = 200000000;   // largest prime bound we will sieve without a cap
    size_t divisor_budget = 1u << 22;
    unsigned workers = 0;
};

// Upper bound for primes attached to divisor d: min(d * x^{1-B}, p_cap).
inline double pair_bound_ln(const ConstructionContext& ctx, uint64_t d) {
    return std::log(static_cast<double>(d)) + (1.0 - ctx.B) * ctx.log_x;
}

// All pairs, ordered by (d, p). Divisors are generated only up to the prime
// bound, so the 2^omega(L) divisor lattice is never walked in full.
inline std::vector<PrimePair> enumerate_pairs(const ConstructionContext& ctx,
                                              const PairEnumOptions& opts = {}) {
    double x1mb_ln = (1.0 - ctx.B) * ctx.log_x;
    uint64_t global_cap;
    if (ctx.p_cap) {
        global_cap = *ctx.p_cap;
    } else {
        if (!log_le(x1mb_ln + ln_mpz(ctx.L.value), std::log(static_cast<double>(opts.scan_limit))))
            throw budget_error(
                "enumerate_pairs: the bound L*x^{1-B} is out of desk range; set p_cap to bound the scan");
        global_cap = static_cast<uint64_t>(std::exp(std::min(
            x1mb_ln + ln_mpz(ctx.L.value), std::log(static_cast<double>(opts.scan_limit)))));
    }

    std::vector<uint64_t> divs = divisors_up_to(ctx.L_primes, global_cap, opts.divisor_budget);
    std::vector<uint64_t> primes = primes_in(1, global_cap);

    uint64_t M64 = to_u64(ctx.M);
    uint64_t a64 = to_u64(ctx.a % ctx.M);

    auto per_divisor = parallel_chunks(divs.size(), opts.workers, [&](size_t di) {
        std::vector<PrimePair> out;
        uint64_t d = divs[di];
        std::vector<uint64_t> cofactor_primes;  // primes of L/d
        for (uint64_t q : ctx.L_primes)
            if (d % q != 0) cofactor_primes.push_back(q);
        double bound_ln = pair_bound_ln(ctx, d);
        for (uint64_t p : primes) {
            if (!log_le(std::log(static_cast<double>(p)), bound_ln)) break;
            if (p % M64 != a64) continue;
            if (p % d != 1 % d) continue;
            uint64_t k = (p - 1) / d;
            if (k == 0) continue;  // p = d + 1 is fine; k = 0 only for p = 1
            if (mpz_gcd_ui(nullptr, ctx.L.value.get_mpz_t(), k) != 1) continue;
            if (!euler_qr_all_u64(p, cofactor_primes)) continue;
            out.push_back({p, d, k});
        }
        return out;
    });

    std::vector<PrimePair> pairs;
    for (auto& v : per_divisor) pairs.insert(pairs.end(), v.begin(), v.end());
    return pairs;
}

// Re-validate one pair against its defining predicates, independently of the
// enumeration path. Used by tests and by the CLI soundness check.
inline bool pair_is_valid(const ConstructionContext& ctx, const PrimePair& pr) {
    if (!is_prime_u64(pr.p)) return false;
    if (pr.d == 0 || !mpz_divisible_ui_p(ctx.L.value.get_mpz_t(), pr.d)) return false;
    if (pr.k == 0 || pr.p != pr.d * pr.k + 1) return false;
    if (Int(static_cast<unsigned long>(pr.p)) % ctx.M != ctx.a % ctx.M) return false;
    if (mpz_gcd_ui(nullptr, ctx.L.value.get_mpz_t(), pr.k) != 1) return false;
    double bound_ln = pair_bound_ln(ctx, pr.d);
    if (ctx.p_cap) bound_ln = std::min(bound_ln, std::log(static_cast<double>(*ctx.p_cap)));
    if (!log_le(std::log(static_cast<double>(pr.p)), bound_ln)) return false;
    // p = 1 (mod d) makes p a square mod d; QR mod L needs the cofactor too.
    std::vector<uint64_t> cofactor_primes;
    for (uint64_t q : ctx.L_primes)
        if (pr.d % q != 0) cofactor_primes.push_back(q);
    return euler_qr_all_u64(pr.p, cofactor_primes);
}

// The selected k with its prime pool and selection bookkeeping.
struct PrimePool {
    uint64_t k = 1;
    std::vector<PrimePair> primes;        // distinct p, ascending
    std::map<uint64_t, size_t> counts;    // representation histogram over k
    double eq5_bound = 0;                 // (3/2)^omega(L) / (4 phi(M) ln x)
    bool eq5_satisfied = false;
    bool cap_binding = false;
};

// Pick the k with the most representations as (p-1)/d; ties go to the
// smallest k so runs are reproducible.
inline PrimePool select_k(const ConstructionContext& ctx, const std::vector<PrimePair>& pairs) {
    if (pairs.empty()) throw domain_error("select_k: no pairs to select from");
    PrimePool pool;
    for (const auto& pr : pairs) ++pool.counts[pr.k];
    size_t best = 0;
    for (const auto& [k, c] : pool.counts) {
        if (c > best) { best = c; pool.k = k; }
    }
    for (const auto& pr : pairs)
        if (pr.k == pool.k) pool.primes.push_back(pr);
    std::sort(pool.primes.begin(), pool.primes.end(),
              [](const PrimePair& l, const PrimePair& r) { return l.p < r.p; });

    double phiM = mpz_get_d(euler_phi(factor(ctx.M)).get_mpz_t());
    pool.eq5_bound = std::pow(1.5, static_cast<double>(ctx.L_primes.size())) / (4.0 * phiM * ctx.log_x);
    pool.eq5_satisfied = static_cast<double>(pool.primes.size()) > pool.eq5_bound;
    if (ctx.p_cap) {
        double dmax_ln = ln_mpz(ctx.L.value);
        pool.cap_binding =
            !log_le(dmax_ln + (1.0 - ctx.B) * ctx.log_x, std::log(static_cast<double>(*ctx.p_cap)));
    }
    return pool;
}

// Generalized divisor pool: all primes p with p-1 | N, p not dividing N,
// optionally p = a (mod M) and p = 1 (mod k). With N = kL this contains
// every prime the paper's (p, d) shape can produce.
inline PrimePool pool_from_divisors(uint64_t k, const FactoredInteger& N,
                                    std::optional<std::pair<Int, Int>> class_filter = std::nullopt,
                                    size_t divisor_budget = 1u << 22) {
    if (N.value < 2) throw domain_error("pool_from_divisors: N must be >= 2");
    if (k < 1 || !mpz_divisible_ui_p(N.value.get_mpz_t(), k))
        throw domain_error("pool_from_divisors: k must be a positive divisor of N");
    PrimePool pool;
    pool.k = k;
    for (const Int& dd : divisors(N, divisor_budget)) {
        Int p = dd + 1;
        if (!is_prime(p)) continue;
        if (mpz_divisible_p(N.value.get_mpz_t(), p.get_mpz_t())) continue;
        if (class_filter) {
            const auto& [a, M] = *class_filter;
            if (p % M != a % M) continue;
        }
        if ((p - 1) % k != 0) continue;
        uint64_t pu = to_u64(p);
        pool.primes.push_back({pu, (pu - 1) / k, k});
        ++pool.counts[k];
    }
    std::sort(pool.primes.begin(), pool.primes.end(),
              [](const PrimePair& l, const PrimePair& r) { return l.p < r.p; });
    return pool;
}

}  // namespace carm
