#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "carm/arith.hpp"
#include "carm/construction.hpp"
#include "carm/korselt.hpp"

namespace carm {

enum class SearchStrategy { automatic, exhaustive, meet_in_middle, residue_dp };

inline const char* strategy_name(SearchStrategy s) {
    switch (s) {
        case SearchStrategy::exhaustive: return "exhaustive";
        case SearchStrategy::meet_in_middle: return "mitm";
        case SearchStrategy::residue_dp: return "dp";
        default: return "auto";
    }
}

struct SearchLimits {
    SearchStrategy strategy = SearchStrategy::automatic;
    uint64_t max_hits = 1000000;
    unsigned max_subset = 12;
    size_t raw_limit = 1u << 22;        // solutions collected before sort/cap
    uint64_t dp_state_limit = 1u << 22;  // kL*M states for the residue-DP table
};

// A verified hit: squarefree product of >= 2 pool primes, = 1 (mod kL) and
// = a (mod M), Korselt-checked before emission.
struct CarmichaelHit {
    std::vector<Int> primes;
    Int n;
    Int a, M;
    Int residue_kL, residue_M;  // certificate values of n
    bool korselt_ok = false;
    std::string strategy;
};

struct SearchResult {
    std::vector<CarmichaelHit> hits;  // sorted by n
    bool truncated = false;
    std::string strategy;
};

namespace detail {

struct ResU64 {
    uint64_t mod;
    uint64_t unit() const { return 1 % mod; }
    uint64_t reduce(uint64_t v) const { return v % mod; }
    uint64_t mul(uint64_t x, uint64_t y) const { return mul_mod_u64(x, y, mod); }
    uint64_t inv(uint64_t x) const {
        int64_t t = 0, newt = 1;
        int64_t r = static_cast<int64_t>(mod), newr = static_cast<int64_t>(x);
        while (newr != 0) {
            int64_t q = r / newr;
            t -= q * newt; std::swap(t, newt);
            r -= q * newr; std::swap(r, newr);
        }
        return t < 0 ? static_cast<uint64_t>(t + static_cast<int64_t>(mod)) : static_cast<uint64_t>(t);
    }
};

struct ResMpz {
    Int mod;
    Int unit() const { return Int(1 % mod); }
    Int reduce(uint64_t v) const { return Int(static_cast<unsigned long>(v) % mod); }
    Int mul(const Int& x, const Int& y) const { return Int(x * y % mod); }
    Int inv(const Int& x) const {
        Int r;
        if (mpz_invert(r.get_mpz_t(), x.get_mpz_t(), mod.get_mpz_t()) == 0)
            throw domain_error("subset search: non-invertible residue");
        return r;
    }
};

// DFS over all subsets; masks of solutions appended to out.
template <class Ops>
void search_exhaustive(const std::vector<uint64_t>& primes, const Ops& o1, const Ops& o2,
                       const decltype(Ops{}.unit())& target2, const SearchLimits& lim,
                       std::vector<uint32_t>& out) {
    using R = decltype(o1.unit());
    size_t n = primes.size();
    std::vector<R> red1(n), red2(n);
    for (size_t i = 0; i < n; ++i) {
        red1[i] = o1.reduce(primes[i]);
        red2[i] = o2.reduce(primes[i]);
    }
    auto dfs = [&](auto&& self, size_t i, R r1, R r2, unsigned count, uint32_t mask) -> void {
        if (i == n) {
            if (count >= 2 && r1 == o1.unit() && r2 == target2) {
                if (out.size() >= lim.raw_limit)
                    throw budget_error("subset search: raw solution budget exceeded");
                out.push_back(mask);
            }
            return;
        }
        self(self, i + 1, r1, r2, count, mask);
        if (count < lim.max_subset)
            self(self, i + 1, o1.mul(r1, red1[i]), o2.mul(r2, red2[i]), count + 1,
                 mask | (uint32_t{1} << i));
    };
    dfs(dfs, 0, o1.unit(), o2.unit(), 0, 0);
}

template <class Ops>
void search_mitm(const std::vector<uint64_t>& primes, const Ops& o1, const Ops& o2,
                 const decltype(Ops{}.unit())& target2, const SearchLimits& lim,
                 std::vector<uint32_t>& out) {
    using R = decltype(o1.unit());
    size_t n = primes.size();
    size_t nA = n / 2;
    struct Partial {
        R r1, r2;
        unsigned count;
        uint32_t mask;
    };
    auto enumerate_half = [&](size_t lo, size_t hi) {
        std::vector<Partial> v;
        auto dfs = [&](auto&& self, size_t i, R r1, R r2, unsigned count, uint32_t mask) -> void {
            if (i == hi) {
                v.push_back({r1, r2, count, mask});
                return;
            }
            self(self, i + 1, r1, r2, count, mask);
            if (count < lim.max_subset)
                self(self, i + 1, o1.mul(r1, o1.reduce(primes[i])), o2.mul(r2, o2.reduce(primes[i])),
                     count + 1, mask | (uint32_t{1} << (i - lo)));
        };
        dfs(dfs, lo, o1.unit(), o2.unit(), 0, 0);
        return v;
    };
    std::vector<Partial> A = enumerate_half(0, nA);
    std::vector<Partial> B = enumerate_half(nA, n);
    std::map<std::pair<R, R>, std::vector<const Partial*>> index;
    for (const Partial& b : B) index[{b.r1, b.r2}].push_back(&b);
    for (const Partial& a : A) {
        // need rB = inv(rA) mod kL and rB = target * inv(rA) mod M
        R need1 = o1.inv(a.r1);
        R need2 = o2.mul(target2, o2.inv(a.r2));
        auto it = index.find({need1, need2});
        if (it == index.end()) continue;
        for (const Partial* b : it->second) {
            unsigned total = a.count + b->count;
            if (total < 2 || total > lim.max_subset) continue;
            if (out.size() >= lim.raw_limit)
                throw budget_error("subset search: raw solution budget exceeded");
            out.push_back(a.mask | (b->mask << nA));
        }
    }
}

// Residue-DP: backward reachability tables over (res mod kL, res mod M)
// states, then a forward DFS that only walks live branches.
inline void search_dp(const std::vector<uint64_t>& primes, uint64_t kL, uint64_t M,
                      uint64_t target2, const SearchLimits& lim, std::vector<uint32_t>& out) {
    size_t n = primes.size();
    uint64_t states = kL * M;
    size_t words = (states + 63) / 64;
    std::vector<std::vector<uint64_t>> reach(n + 1, std::vector<uint64_t>(words, 0));
    auto set_bit = [&](std::vector<uint64_t>& bs, uint64_t i) { bs[i >> 6] |= uint64_t{1} << (i & 63); };
    auto get_bit = [&](const std::vector<uint64_t>& bs, uint64_t i) {
        return (bs[i >> 6] >> (i & 63)) & 1;
    };
    uint64_t target_state = (1 % kL) * M + target2;
    set_bit(reach[n], target_state);
    for (size_t i = n; i-- > 0;) {
        uint64_t p1 = primes[i] % kL, p2 = primes[i] % M;
        for (uint64_t r1 = 0; r1 < kL; ++r1) {
            uint64_t m1 = mul_mod_u64(r1, p1, kL);
            for (uint64_t r2 = 0; r2 < M; ++r2) {
                uint64_t s = r1 * M + r2;
                if (get_bit(reach[i + 1], s) ||
                    get_bit(reach[i + 1], m1 * M + mul_mod_u64(r2, p2, M)))
                    set_bit(reach[i], s);
            }
        }
    }
    uint64_t start = (1 % kL) * M + (1 % M);
    if (!get_bit(reach[0], start)) return;
    auto dfs = [&](auto&& self, size_t i, uint64_t r1, uint64_t r2, unsigned count,
                   uint32_t mask) -> void {
        if (!get_bit(reach[i], r1 * M + r2)) return;
        if (i == n) {  // reach[n] holds only the target state
            if (count >= 2) {
                if (out.size() >= lim.raw_limit)
                    throw budget_error("subset search: raw solution budget exceeded");
                out.push_back(mask);
            }
            return;
        }
        self(self, i + 1, r1, r2, count, mask);
        if (count < lim.max_subset)
            self(self, i + 1, mul_mod_u64(r1, primes[i] % kL, kL), mul_mod_u64(r2, primes[i] % M, M),
                 count + 1, mask | (uint32_t{1} << i));
    };
    dfs(dfs, 0, 1 % kL, 1 % M, 0, 0);
}

}  // namespace detail

// All subsets S of the pool (|S| >= 2, within limits) whose product is
// 1 (mod kL) and a (mod M), each Korselt-verified before emission and the
// whole list sorted by n. The three strategies return identical hit sets.
inline SearchResult subset_product_search(const std::vector<uint64_t>& pool_primes, const Int& kL,
                                          const Int& a, const Int& M,
                                          const SearchLimits& lim = {}) {
    if (kL < 1 || M < 1) throw domain_error("subset search: moduli must be >= 1");
    if (pool_primes.size() > 31) throw budget_error("subset search: pool larger than 31 primes");
    Int a_norm;
    mpz_mod(a_norm.get_mpz_t(), a.get_mpz_t(), M.get_mpz_t());
    Int kLM = kL * M;
    for (size_t i = 0; i < pool_primes.size(); ++i) {
        uint64_t p = pool_primes[i];
        if (i > 0 && pool_primes[i] <= pool_primes[i - 1])
            throw pool_error("subset search: pool primes must be distinct and ascending");
        if (!is_prime_u64(p)) throw pool_error("subset search: " + std::to_string(p) + " is not prime");
        if (!mpz_divisible_p(kL.get_mpz_t(), Int(static_cast<unsigned long>(p - 1)).get_mpz_t()))
            throw pool_error("subset search: p-1 does not divide kL for p = " + std::to_string(p));
        if (mpz_gcd_ui(nullptr, kLM.get_mpz_t(), p) != 1)
            throw pool_error("subset search: p = " + std::to_string(p) + " divides kL*M");
    }

    SearchStrategy strat = lim.strategy;
    if (strat == SearchStrategy::automatic)
        strat = pool_primes.size() <= 25 ? SearchStrategy::exhaustive : SearchStrategy::meet_in_middle;
    if (strat == SearchStrategy::exhaustive && pool_primes.size() > 25)
        throw budget_error("subset search: exhaustive strategy supports at most 25 primes");

    std::vector<uint32_t> masks;
    bool small = fits_u64(kL) && fits_u64(M);
    if (strat == SearchStrategy::residue_dp) {
        if (!small || !fits_u64(kLM) || to_u64(kLM) > lim.dp_state_limit)
            throw budget_error("subset search: kL*M too large for the residue-DP table");
        detail::search_dp(pool_primes, to_u64(kL), to_u64(M), to_u64(a_norm), lim, masks);
    } else if (small) {
        detail::ResU64 o1{to_u64(kL)}, o2{to_u64(M)};
        uint64_t t2 = to_u64(a_norm);
        if (strat == SearchStrategy::exhaustive)
            detail::search_exhaustive(pool_primes, o1, o2, t2, lim, masks);
        else
            detail::search_mitm(pool_primes, o1, o2, t2, lim, masks);
    } else {
        detail::ResMpz o1{kL}, o2{M};
        if (strat == SearchStrategy::exhaustive)
            detail::search_exhaustive(pool_primes, o1, o2, a_norm, lim, masks);
        else
            detail::search_mitm(pool_primes, o1, o2, a_norm, lim, masks);
    }

    SearchResult res;
    res.strategy = strategy_name(strat);
    for (uint32_t mask : masks) {
        CarmichaelHit hit;
        hit.strategy = res.strategy;
        hit.a = a_norm;
        hit.M = M;
        hit.n = 1;
        for (size_t i = 0; i < pool_primes.size(); ++i)
            if (mask & (uint32_t{1} << i)) {
                hit.primes.emplace_back(static_cast<unsigned long>(pool_primes[i]));
                hit.n *= hit.primes.back();
            }
        mpz_mod(hit.residue_kL.get_mpz_t(), hit.n.get_mpz_t(), kL.get_mpz_t());
        mpz_mod(hit.residue_M.get_mpz_t(), hit.n.get_mpz_t(), M.get_mpz_t());
        hit.korselt_ok = korselt_criterion(FactoredInteger::from_primes(hit.primes));
        if (!hit.korselt_ok || hit.residue_kL != 1 % kL || hit.residue_M != a_norm)
            throw error("subset search: emitted subset failed verification");
        res.hits.push_back(std::move(hit));
    }
    std::sort(res.hits.begin(), res.hits.end(),
              [](const CarmichaelHit& x, const CarmichaelHit& y) { return x.n < y.n; });
    if (res.hits.size() > lim.max_hits) {
        res.hits.resize(lim.max_hits);
        res.truncated = true;
    }
    return res;
}

inline SearchResult subset_product_search(const PrimePool& pool, const Int& kL, const Int& a,
                                          const Int& M, const SearchLimits& lim = {}) {
    std::vector<uint64_t> ps;
    for (const auto& pr : pool.primes) ps.push_back(pr.p);
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    return subset_product_search(ps, kL, a, M, lim);
}

}  // namespace carm
