#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "carm/arith.hpp"
#include "carm/parallel.hpp"

namespace carm {

// Exactly the primes in (lo, hi], segmented Eratosthenes.
inline std::vector<uint64_t> primes_in(uint64_t lo, uint64_t hi,
                                       uint64_t budget = (1ull << 34)) {
    if (lo > hi) throw domain_error("primes_in: lo > hi");
    if (hi > budget) throw budget_error("primes_in: bound " + std::to_string(hi) + " exceeds sieve budget");
    std::vector<uint64_t> out;
    if (hi < 2) return out;

    uint64_t root = static_cast<uint64_t>(std::sqrt(static_cast<double>(hi))) + 2;
    std::vector<uint64_t> base;
    {
        std::vector<uint8_t> comp(root + 1, 0);
        for (uint64_t i = 2; i <= root; ++i) {
            if (!comp[i]) {
                base.push_back(i);
                for (uint64_t j = i * i; j <= root; j += i) comp[j] = 1;
            }
        }
    }

    const uint64_t seg = 1u << 20;
    std::vector<uint8_t> comp(seg);
    for (uint64_t start = lo + 1; start <= hi; start += seg) {
        uint64_t end = std::min(hi, start + seg - 1);
        std::fill(comp.begin(), comp.begin() + (end - start + 1), 0);
        for (uint64_t p : base) {
            if (p * p > end) break;
            uint64_t first = std::max(p * p, (start + p - 1) / p * p);
            for (uint64_t m = first; m <= end; m += p) comp[m - start] = 1;
        }
        for (uint64_t n = std::max<uint64_t>(start, 2); n <= end; ++n)
            if (!comp[n - start]) out.push_back(n);
    }
    return out;
}

// Parameters for the smooth-prime sieve: primes q in (y, y*ln^2 y] with
// q = -1 (mod mu) and y-smooth q-1, where mu = phi(4M).
struct SieveContext {
    Int M;
    Int a;
    Int mu;
    double y = 0;
    double B = 0;
    std::vector<Int> exclusions;

    static SieveContext make(const Int& a, const Int& M, double B, double y,
                             std::vector<Int> exclusions = {}) {
        if (M < 2) throw domain_error("SieveContext: modulus M must be >= 2");
        Int g;
        mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), M.get_mpz_t());
        if (g != 1) throw domain_error("SieveContext: gcd(a, M) = " + to_decimal(g) + " != 1");
        if (!(B > 0.0 && B < 5.0 / 12.0)) throw domain_error("SieveContext: B must lie strictly in (0, 5/12)");
        if (!(y >= 2.0)) throw domain_error("SieveContext: y must be >= 2");
        for (const Int& d : exclusions)
            if (d < 2) throw domain_error("SieveContext: exclusion entries must be > 1");
        SieveContext ctx;
        ctx.M = M;
        ctx.a = a;
        ctx.mu = euler_phi(factor(4 * M));
        ctx.y = y;
        ctx.B = B;
        ctx.exclusions = std::move(exclusions);
        if (ctx.mu % 4 != 0) throw domain_error("SieveContext: phi(4M) not divisible by 4");
        return ctx;
    }

    uint64_t interval_hi() const {
        double t = std::log(y);
        return static_cast<uint64_t>(std::floor(y * t * t));
    }
};

struct SmoothPrimeSet {
    double y = 0;
    Int mu;
    std::vector<uint64_t> primes;                          // ascending
    std::vector<std::pair<uint64_t, std::string>> removed;  // exceptional-exclusion audit
    uint64_t interval_hi = 0;
    uint64_t nonsmooth_rejected = 0;  // interval primes = -1 (mod mu) failing P(q-1) <= y
};

// The set Q0. Smoothness is decided by full trial division of q-1 by primes
// <= y; since q-1 <= y*ln^2 y < y^2 the leftover cofactor is prime, so the
// test is complete.
inline SmoothPrimeSet build_Q0(const SieveContext& ctx, unsigned workers = 0) {
    SmoothPrimeSet qs;
    qs.y = ctx.y;
    qs.mu = ctx.mu;
    qs.interval_hi = ctx.interval_hi();
    uint64_t lo = static_cast<uint64_t>(std::floor(ctx.y));
    if (qs.interval_hi <= lo) return qs;

    uint64_t mu = to_u64(ctx.mu);
    std::vector<uint64_t> small = primes_in(0, lo);  // primes <= y (floor(y) = lo since q > y)
    std::vector<uint64_t> cand = primes_in(lo, qs.interval_hi);

    const size_t chunk = 4096;
    size_t n_chunks = (cand.size() + chunk - 1) / chunk;
    struct ChunkResult {
        std::vector<uint64_t> smooth;
        uint64_t rejected = 0;
    };
    auto results = parallel_chunks(n_chunks, workers, [&](size_t c) {
        ChunkResult res;
        size_t b = c * chunk, e = std::min(cand.size(), b + chunk);
        for (size_t i = b; i < e; ++i) {
            uint64_t q = cand[i];
            if (static_cast<double>(q) <= ctx.y) continue;  // q > y, strictly
            if (q % mu != mu - 1) continue;
            uint64_t r = q - 1;
            for (uint64_t p : small) {
                if (p * p > r) break;
                while (r % p == 0) r /= p;
            }
            // r is now 1 or a single prime factor > sqrt-trial range
            if (r == 1 || static_cast<double>(r) <= ctx.y)
                res.smooth.push_back(q);
            else
                ++res.rejected;
        }
        return res;
    });
    for (auto& res : results) {
        qs.primes.insert(qs.primes.end(), res.smooth.begin(), res.smooth.end());
        qs.nonsmooth_rejected += res.rejected;
    }
    return qs;
}

// For each member of D_set, remove its smallest prime factor from Q if
// present, logging the removal. Deterministic surrogate for the paper's
// exceptional-modulus set.
inline SmoothPrimeSet exclude_exceptional(SmoothPrimeSet Q, const std::vector<Int>& D_set,
                                          const FactorBudget& budget = {}) {
    for (const Int& d : D_set) {
        if (d < 2) throw domain_error("exclude_exceptional: entries must be > 1");
        Int spf = factor(d, budget).factors.front().first;
        if (!fits_u64(spf)) continue;
        uint64_t q = to_u64(spf);
        auto it = std::lower_bound(Q.primes.begin(), Q.primes.end(), q);
        if (it != Q.primes.end() && *it == q) {
            Q.primes.erase(it);
            Q.removed.emplace_back(q, "exceptional " + to_decimal(d));
        }
    }
    return Q;
}

// L = product of the sieved primes, squarefree and odd by construction.
inline FactoredInteger build_L(const SmoothPrimeSet& Q) {
    if (Q.primes.empty()) throw empty_sieve_error("build_L: empty prime set");
    FactoredInteger L;
    for (uint64_t q : Q.primes) {
        Int qi(static_cast<unsigned long>(q));
        L.factors.emplace_back(qi, 1);
        L.value *= qi;
    }
    return L;
}

struct SieveDiagnostics {
    size_t count = 0;
    double predicted = 0;       // y ln y / phi(mu)
    double ratio = 0;           // count / predicted
    double reciprocal_sum = 0;  // sum 1/q
    uint64_t nonsmooth_rejected = 0;
    double y = 0;
    Int mu;
    uint64_t interval_hi = 0;
};

inline SieveDiagnostics diagnostics_Q(const SmoothPrimeSet& Q) {
    SieveDiagnostics d;
    d.count = Q.primes.size();
    d.y = Q.y;
    d.mu = Q.mu;
    d.interval_hi = Q.interval_hi;
    d.nonsmooth_rejected = Q.nonsmooth_rejected;
    if (Q.y > 0 && Q.mu >= 1) {
        Int phi_mu = euler_phi(factor(Q.mu));
        d.predicted = Q.y * std::log(Q.y) / mpz_get_d(phi_mu.get_mpz_t());
        if (d.predicted > 0) d.ratio = static_cast<double>(d.count) / d.predicted;
    }
    for (uint64_t q : Q.primes) d.reciprocal_sum += 1.0 / static_cast<double>(q);
    return d;
}

}  // namespace carm
