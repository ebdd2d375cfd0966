#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "carm/errors.hpp"

namespace carm {

// Arbitrary-precision integer used throughout the public API. Hot loops work
// in uint64_t and only widen where products can overflow.
using Int = mpz_class;

inline std::string to_decimal(const Int& n) { return n.get_str(10); }

// Natural log of a nonnegative mpz, accurate to double precision regardless
// of magnitude (mantissa + exponent split, so no overflow on the way).
inline double ln_mpz(const Int& n) {
    if (n <= 0) throw domain_error("ln_mpz: argument must be positive");
    long exp2 = 0;
    double mant = mpz_get_d_2exp(&exp2, n.get_mpz_t());
    return std::log(mant) + static_cast<double>(exp2) * std::log(2.0);
}

inline bool fits_u64(const Int& n) {
    return n >= 0 && mpz_sizeinbase(n.get_mpz_t(), 2) <= 64;
}

inline uint64_t to_u64(const Int& n) {
    if (!fits_u64(n)) throw budget_error("value " + to_decimal(n) + " exceeds the 64-bit working range");
    uint64_t lo = mpz_getlimbn(n.get_mpz_t(), 0);
    return mpz_size(n.get_mpz_t()) == 0 ? 0 : lo;
}

// ---------------------------------------------------------------------------
// 64-bit modular arithmetic

inline uint64_t mul_mod_u64(uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline uint64_t pow_mod_u64(uint64_t base, uint64_t exp, uint64_t mod) {
    if (mod == 0) throw domain_error("pow_mod_u64: zero modulus");
    if (mod == 1) return 0;
    uint64_t r = 1;
    base %= mod;
    while (exp) {
        if (exp & 1) r = mul_mod_u64(r, base, mod);
        base = mul_mod_u64(base, base, mod);
        exp >>= 1;
    }
    return r;
}

// Deterministic Miller-Rabin for the full 64-bit range.
// Base set due to Sinclair; verified sufficient for n < 2^64.
inline bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (uint64_t a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
        uint64_t x = pow_mod_u64(a % n, d, n);
        if (x == 0 || x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mul_mod_u64(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Arbitrary-precision primitives

// base^exp mod modulus in O(log exp) multiplications. Result in [0, modulus).
inline Int mod_pow(const Int& base, const Int& exp, const Int& modulus) {
    if (modulus < 1) throw domain_error("mod_pow: modulus must be >= 1");
    if (exp < 0) throw domain_error("mod_pow: negative exponent");
    Int r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), modulus.get_mpz_t());
    return r;
}

// Exact and deterministic for all 64-bit inputs; above 2^64 this is a
// probable-prime test (GMP, 40 rounds) and is documented as such.
inline bool is_prime(const Int& n) {
    if (n < 2) return false;
    if (fits_u64(n)) return is_prime_u64(to_u64(n));
    return mpz_probab_prime_p(n.get_mpz_t(), 40) != 0;
}

// ---------------------------------------------------------------------------
// Factorization

struct FactorBudget {
    uint64_t trial_limit = 100000;     // trial division by primes up to this
    uint64_t rho_iterations = 30000000;  // total Brent-rho iterations before giving up
};

// An integer carried together with its complete prime factorization.
// factors holds (prime, exponent) with primes strictly increasing;
// value = prod p^e, and value == 1 iff factors is empty.
struct FactoredInteger {
    Int value{1};
    std::vector<std::pair<Int, unsigned>> factors;

    static FactoredInteger one() { return FactoredInteger{}; }

    // Squarefree product of distinct primes (input need not be sorted).
    static FactoredInteger from_primes(std::vector<Int> primes) {
        std::sort(primes.begin(), primes.end());
        FactoredInteger f;
        for (size_t i = 0; i < primes.size(); ++i) {
            if (i > 0 && primes[i] == primes[i - 1])
                throw domain_error("from_primes: repeated prime " + to_decimal(primes[i]));
            if (!is_prime(primes[i]))
                throw domain_error("from_primes: " + to_decimal(primes[i]) + " is not prime");
            f.factors.emplace_back(primes[i], 1);
            f.value *= primes[i];
        }
        return f;
    }

    bool squarefree() const {
        return std::all_of(factors.begin(), factors.end(), [](auto& pe) { return pe.second == 1; });
    }

    // Full invariant check; used by tests and on deserialized input.
    bool consistent() const {
        Int prod = 1;
        Int prev = 0;
        for (const auto& [p, e] : factors) {
            if (p <= prev || e < 1 || !is_prime(p)) return false;
            prev = p;
            for (unsigned i = 0; i < e; ++i) prod *= p;
        }
        return prod == value && value >= 1;
    }
};

namespace detail {

inline uint64_t brent_rho_u64(uint64_t n, uint64_t seed, uint64_t& iter_budget) {
    // Brent's cycle variant with batched gcd.
    uint64_t y = seed % n, c = seed / 3 % n + 1, m = 128;
    uint64_t g = 1, r = 1, q = 1, x = 0, ys = 0;
    while (g == 1) {
        x = y;
        for (uint64_t i = 0; i < r; ++i) y = (mul_mod_u64(y, y, n) + c) % n;
        for (uint64_t k = 0; k < r && g == 1; k += m) {
            ys = y;
            uint64_t lim = std::min(m, r - k);
            if (iter_budget < lim) throw budget_error("factor: rho iteration budget exceeded");
            iter_budget -= lim;
            for (uint64_t i = 0; i < lim; ++i) {
                y = (mul_mod_u64(y, y, n) + c) % n;
                q = mul_mod_u64(q, x > y ? x - y : y - x, n);
            }
            g = std::gcd(q, n);
        }
        r *= 2;
    }
    if (g == n) {
        do {
            ys = (mul_mod_u64(ys, ys, n) + c) % n;
            g = std::gcd(x > ys ? x - ys : ys - x, n);
        } while (g == 1);
    }
    return g;
}

inline void factor_u64_into(uint64_t n, std::vector<Int>& out, uint64_t& iter_budget) {
    if (n == 1) return;
    if (is_prime_u64(n)) { out.emplace_back(Int(static_cast<unsigned long>(n))); return; }
    uint64_t g = n;
    for (uint64_t seed = 2; g == n; ++seed) g = brent_rho_u64(n, seed, iter_budget);
    factor_u64_into(g, out, iter_budget);
    factor_u64_into(n / g, out, iter_budget);
}

inline void factor_mpz_into(const Int& n, std::vector<Int>& out, uint64_t& iter_budget) {
    if (n == 1) return;
    if (fits_u64(n)) { factor_u64_into(to_u64(n), out, iter_budget); return; }
    if (is_prime(n)) { out.push_back(n); return; }
    // Brent rho over mpz; pipeline integers rarely land here.
    for (uint64_t c = 1;; ++c) {
        Int y = 2, x = 0, ys = 0, q = 1, g = 1;
        uint64_t r = 1, m = 128;
        while (g == 1) {
            x = y;
            for (uint64_t i = 0; i < r; ++i) y = (y * y + c) % n;
            for (uint64_t k = 0; k < r && g == 1; k += m) {
                ys = y;
                uint64_t lim = std::min(m, r - k);
                if (iter_budget < lim) throw budget_error("factor: rho iteration budget exceeded");
                iter_budget -= lim;
                for (uint64_t i = 0; i < lim; ++i) {
                    y = (y * y + c) % n;
                    q = q * abs(x - y) % n;
                }
                mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
            }
            r *= 2;
        }
        if (g == n) {
            do {
                ys = (ys * ys + c) % n;
                mpz_gcd(g.get_mpz_t(), Int(abs(x - ys)).get_mpz_t(), n.get_mpz_t());
            } while (g == 1);
        }
        if (g != n) {
            factor_mpz_into(g, out, iter_budget);
            factor_mpz_into(Int(n / g), out, iter_budget);
            return;
        }
    }
}

}  // namespace detail

// Complete factorization of n >= 1. Trial division up to budget.trial_limit,
// then Brent rho. Exceeding the budget throws budget_error; there is no
// partial-result path.
inline FactoredInteger factor(const Int& n, const FactorBudget& budget = {}) {
    if (n < 1) throw domain_error("factor: argument must be >= 1");
    FactoredInteger out;
    out.value = n;
    Int m = n;
    std::vector<Int> primes;
    auto strip = [&](uint64_t p) {
        unsigned e = 0;
        while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
            mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
            ++e;
        }
        if (e) out.factors.emplace_back(Int(static_cast<unsigned long>(p)), e);
    };
    strip(2);
    strip(3);
    for (uint64_t p = 5; p <= budget.trial_limit && m > 1; p += 6) {
        if (Int(p) * p > m) break;
        strip(p);
        strip(p + 2);
    }
    if (m > 1) {
        uint64_t iter_budget = budget.rho_iterations;
        detail::factor_mpz_into(m, primes, iter_budget);
        std::sort(primes.begin(), primes.end());
        for (size_t i = 0; i < primes.size();) {
            size_t j = i;
            while (j < primes.size() && primes[j] == primes[i]) ++j;
            out.factors.emplace_back(primes[i], static_cast<unsigned>(j - i));
            i = j;
        }
    }
    std::sort(out.factors.begin(), out.factors.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

// P(n): largest prime factor, with P(1) = 1.
inline Int largest_prime_factor(const Int& n, const FactorBudget& budget = {}) {
    if (n < 1) throw domain_error("largest_prime_factor: argument must be >= 1");
    if (n == 1) return 1;
    return factor(n, budget).factors.back().first;
}

inline Int euler_phi(const FactoredInteger& n) {
    Int phi = 1;
    for (const auto& [p, e] : n.factors) {
        Int pe1 = 1;
        for (unsigned i = 1; i < e; ++i) pe1 *= p;
        phi *= pe1 * (p - 1);
    }
    return phi;
}

// Universal exponent of (Z/nZ)*. For squarefree odd n this is lcm(p-1).
inline Int carmichael_lambda(const FactoredInteger& n) {
    Int lam = 1;
    for (const auto& [p, e] : n.factors) {
        Int comp;
        if (p == 2) {
            comp = e <= 2 ? Int(e) : Int(Int(1) << (e - 2));
        } else {
            comp = p - 1;
            for (unsigned i = 1; i < e; ++i) comp *= p;
        }
        mpz_lcm(lam.get_mpz_t(), lam.get_mpz_t(), comp.get_mpz_t());
    }
    return lam;
}

inline unsigned omega(const FactoredInteger& n) { return static_cast<unsigned>(n.factors.size()); }

inline unsigned big_omega(const FactoredInteger& n) {
    unsigned s = 0;
    for (const auto& [p, e] : n.factors) s += e;
    return s;
}

// ---------------------------------------------------------------------------
// Congruences

struct Congruence {
    Int residue;
    Int modulus;

    Congruence(Int r, Int m) : residue(std::move(r)), modulus(std::move(m)) {
        if (modulus < 1) throw domain_error("Congruence: modulus must be >= 1");
        mpz_mod(residue.get_mpz_t(), residue.get_mpz_t(), modulus.get_mpz_t());
    }
};

// Glue congruences with pairwise-coprime moduli into one modulo the product.
inline Congruence crt_combine(const std::vector<Congruence>& congruences) {
    Int r = 0, m = 1;
    for (size_t i = 0; i < congruences.size(); ++i) {
        const Int& mi = congruences[i].modulus;
        Int g;
        mpz_gcd(g.get_mpz_t(), m.get_mpz_t(), mi.get_mpz_t());
        if (g != 1) {
            // Name the offending pair, not just the running product.
            for (size_t j = 0; j < i; ++j) {
                Int gj;
                mpz_gcd(gj.get_mpz_t(), congruences[j].modulus.get_mpz_t(), mi.get_mpz_t());
                if (gj != 1)
                    throw domain_error("crt_combine: moduli " + to_decimal(congruences[j].modulus) +
                                       " and " + to_decimal(mi) + " share factor " + to_decimal(gj));
            }
            throw domain_error("crt_combine: non-coprime moduli");
        }
        // r' = r + m * ((ri - r) * m^{-1} mod mi)
        Int inv;
        if (mi > 1 && mpz_invert(inv.get_mpz_t(), m.get_mpz_t(), mi.get_mpz_t()) == 0)
            throw domain_error("crt_combine: modulus inversion failed");
        Int t = congruences[i].residue - r;
        mpz_mod(t.get_mpz_t(), t.get_mpz_t(), mi.get_mpz_t());
        if (mi > 1) t = t * inv % mi;
        r += m * t;
        m *= mi;
    }
    return Congruence(r, m);
}

// ---------------------------------------------------------------------------
// Quadratic residues mod an odd squarefree modulus

// True iff b is a square modulo every prime q | L, by Euler's criterion.
// Requires gcd(b, L) = 1 and L odd squarefree (L = 1 is vacuously true).
inline bool is_qr_mod_squarefree(const Int& b, const FactoredInteger& L) {
    if (!L.squarefree() || (!L.factors.empty() && L.factors.front().first == 2))
        throw domain_error("is_qr_mod_squarefree: modulus must be odd and squarefree");
    Int g;
    mpz_gcd(g.get_mpz_t(), b.get_mpz_t(), L.value.get_mpz_t());
    if (g != 1)
        throw domain_error("is_qr_mod_squarefree: gcd(b, L) = " + to_decimal(g) + " > 1");
    for (const auto& [q, e] : L.factors) {
        (void)e;
        if (mod_pow(b, (q - 1) / 2, q) != 1) return false;
    }
    return true;
}

// Non-throwing variant for filter loops: false for non-units.
inline bool euler_qr_all_u64(uint64_t p, const std::vector<uint64_t>& qs) {
    for (uint64_t q : qs) {
        uint64_t r = p % q;
        if (r == 0 || pow_mod_u64(r, (q - 1) / 2, q) != 1) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Divisor enumeration

// All divisors of n, ascending. Throws budget_error if there are more than max_count.
inline std::vector<Int> divisors(const FactoredInteger& n, size_t max_count = (1u << 22)) {
    size_t count = 1;
    for (const auto& [p, e] : n.factors) {
        (void)p;
        count *= e + 1;
        if (count > max_count)
            throw budget_error("divisors: more than " + std::to_string(max_count) + " divisors");
    }
    std::vector<Int> out{1};
    for (const auto& [p, e] : n.factors) {
        size_t sz = out.size();
        Int pe = 1;
        for (unsigned i = 1; i <= e; ++i) {
            pe *= p;
            for (size_t j = 0; j < sz; ++j) out.push_back(out[j] * pe);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Divisors of squarefree n that are <= cap, ascending. DFS over the sorted
// prime list with cutoff, so the full 2^omega set is never materialized.
inline std::vector<uint64_t> divisors_up_to(const std::vector<uint64_t>& primes, uint64_t cap,
                                            size_t max_count = (1u << 22)) {
    std::vector<uint64_t> out;
    std::vector<uint64_t> sorted = primes;
    std::sort(sorted.begin(), sorted.end());
    auto dfs = [&](auto&& self, size_t i, uint64_t d) -> void {
        if (out.size() >= max_count) throw budget_error("divisors_up_to: budget exceeded");
        out.push_back(d);
        for (size_t j = i; j < sorted.size(); ++j) {
            if (sorted[j] > cap / d) break;
            self(self, j + 1, d * sorted[j]);
        }
    };
    dfs(dfs, 0, 1);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace carm
