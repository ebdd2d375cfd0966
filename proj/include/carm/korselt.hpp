#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "carm/arith.hpp"
#include "carm/parallel.hpp"

namespace carm {

// A verified Carmichael number: composite, squarefree, p-1 | n-1 for all p | n.
struct CarmichaelRecord {
    Int n;
    FactoredInteger factors;
};

// Korselt's criterion evaluated on an already-factored integer.
// Does not re-test primality of the listed factors; callers that take
// factorizations from outside re-validate with FactoredInteger::consistent().
inline bool korselt_criterion(const FactoredInteger& nf) {
    if (nf.factors.size() < 2 || !nf.squarefree()) return false;
    Int nm1 = nf.value - 1;
    for (const auto& [p, e] : nf.factors) {
        (void)e;
        if (!mpz_divisible_p(nm1.get_mpz_t(), Int(p - 1).get_mpz_t())) return false;
    }
    return true;
}

inline bool is_carmichael(const Int& n, const FactorBudget& budget = {}) {
    if (n < 3 || is_prime(n)) return false;
    return korselt_criterion(factor(n, budget));
}

// ---------------------------------------------------------------------------
// Enumeration

struct EnumerateOptions {
    uint64_t budget = 100000000;  // hard ceiling on the enumeration bound
    unsigned workers = 0;         // 0 = hardware concurrency
    uint64_t segment = 1u << 21;
};

namespace detail {

// Korselt scan of odd candidates in [lo, hi) by a segmented smallest-prime
// sieve: each candidate is factored incrementally while multiples are crossed
// off, and the divisibility test p-1 | n-1 runs as factors appear.
inline std::vector<uint64_t> carmichael_segment(uint64_t lo, uint64_t hi,
                                                const std::vector<uint64_t>& base_primes) {
    if (lo % 2 == 0) ++lo;
    if (lo < 3) lo = 3;
    if (lo >= hi) return {};
    size_t slots = (hi - lo + 1) / 2;  // odd n = lo + 2i
    std::vector<uint64_t> rem(slots);
    std::vector<uint8_t> alive(slots, 1);
    std::vector<uint8_t> nfac(slots, 0);
    for (size_t i = 0; i < slots; ++i) rem[i] = lo + 2 * i;

    for (uint64_t p : base_primes) {
        if (p == 2) continue;
        if (p * p >= hi) break;
        uint64_t first = (lo + p - 1) / p * p;
        if (first % 2 == 0) first += p;  // odd multiples only
        if (first == p) first += 2 * p;  // skip p itself; p is prime, not a candidate
        for (uint64_t m = first; m < hi; m += 2 * p) {
            size_t i = (m - lo) / 2;
            if (!alive[i]) continue;
            uint64_t& r = rem[i];
            r /= p;
            if (r % p == 0) {  // p^2 | n: not squarefree
                alive[i] = 0;
                while (r % p == 0) r /= p;
                continue;
            }
            if ((m - 1) % (p - 1) != 0) {
                alive[i] = 0;
                continue;
            }
            ++nfac[i];
        }
    }

    std::vector<uint64_t> found;
    for (size_t i = 0; i < slots; ++i) {
        if (!alive[i]) continue;
        uint64_t n = lo + 2 * i;
        uint64_t r = rem[i];
        uint8_t k = nfac[i];
        if (r > 1) {
            if (r == n) continue;  // prime, not composite
            if ((n - 1) % (r - 1) != 0) continue;
            ++k;
        }
        if (k >= 2) found.push_back(n);
    }
    return found;
}

}  // namespace detail

// Exactly the Carmichael numbers <= limit, ascending, with factorizations.
inline std::vector<CarmichaelRecord> enumerate_carmichael(uint64_t limit,
                                                          const EnumerateOptions& opts = {}) {
    if (limit > opts.budget)
        throw budget_error("enumerate_carmichael: limit " + std::to_string(limit) +
                           " exceeds budget " + std::to_string(opts.budget));
    std::vector<CarmichaelRecord> out;
    if (limit < 561) return out;

    uint64_t root = static_cast<uint64_t>(std::sqrt(static_cast<double>(limit))) + 2;
    std::vector<uint64_t> base;
    {
        std::vector<uint8_t> is_comp(root + 1, 0);
        for (uint64_t i = 2; i <= root; ++i) {
            if (!is_comp[i]) {
                base.push_back(i);
                for (uint64_t j = i * i; j <= root; j += i) is_comp[j] = 1;
            }
        }
    }

    uint64_t hi = limit + 1;
    size_t n_segments = (hi + opts.segment - 1) / opts.segment;
    auto per_segment = parallel_chunks(n_segments, opts.workers, [&](size_t s) {
        uint64_t s_lo = s * opts.segment;
        uint64_t s_hi = std::min(hi, s_lo + opts.segment);
        return detail::carmichael_segment(s_lo, s_hi, base);
    });
    for (const auto& seg : per_segment)
        for (uint64_t n : seg) out.push_back({Int(static_cast<unsigned long>(n)), factor(Int(static_cast<unsigned long>(n)))});
    return out;
}

// ---------------------------------------------------------------------------
// Residue-class counting

struct ClassCount {
    Int X;
    Int a;
    Int M;
    uint64_t count = 0;
    std::vector<Int> witnesses;
    bool witnesses_truncated = false;
};

// C_{a,M}(X) with an optional witness list. a is reduced mod M on entry;
// non-coprime classes are counted like any other (the tool reports, it does
// not claim infinitude anywhere).
inline ClassCount count_in_class(uint64_t X, const Int& a, const Int& M,
                                 const EnumerateOptions& opts = {}, size_t witness_cap = 1000) {
    if (M < 1) throw domain_error("count_in_class: modulus must be >= 1");
    ClassCount cc;
    cc.X = Int(static_cast<unsigned long>(X));
    cc.M = M;
    mpz_mod(cc.a.get_mpz_t(), a.get_mpz_t(), M.get_mpz_t());
    for (const auto& rec : enumerate_carmichael(X, opts)) {
        if (rec.n % M == cc.a) {
            ++cc.count;
            if (cc.witnesses.size() < witness_cap)
                cc.witnesses.push_back(rec.n);
            else
                cc.witnesses_truncated = true;
        }
    }
    return cc;
}

// ---------------------------------------------------------------------------
// Definitional oracle

// True iff n is composite and b^n == b (mod n) for every b in [0, n).
// Deliberately naive; this is the independent reference the Korselt path is
// tested against. Compositeness by trial division, nothing shared with
// is_prime or factor.
inline bool fermat_oracle(uint64_t n, uint64_t cutoff = 100000) {
    if (n > cutoff)
        throw budget_error("fermat_oracle: n exceeds cutoff " + std::to_string(cutoff));
    if (n < 4) return false;
    bool composite = false;
    for (uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) { composite = true; break; }
    }
    if (!composite) return false;
    for (uint64_t b = 0; b < n; ++b) {
        if (pow_mod_u64(b, n, n) != b) return false;
    }
    return true;
}

}  // namespace carm
