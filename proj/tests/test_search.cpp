#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "carm/korselt.hpp"
#include "carm/subset_search.hpp"

using namespace carm;

namespace {

std::vector<Int> hit_values(const SearchResult& r) {
    std::vector<Int> v;
    for (const auto& h : r.hits) v.push_back(h.n);
    return v;
}

SearchLimits with_strategy(SearchStrategy s) {
    SearchLimits lim;
    lim.strategy = s;
    return lim;
}

const std::vector<uint64_t> kPool120{7, 11, 13, 31, 41, 61};
const std::vector<uint64_t> kPool80{3, 11, 17, 41};

}  // namespace

TEST_CASE("divisor pool of 120 yields the three classical hits") {
    auto res = subset_product_search(kPool120, 120, 1, 1);
    CHECK(hit_values(res) == std::vector<Int>{41041, 172081, 852841});
    CHECK_FALSE(res.truncated);

    auto& first = res.hits[0];
    CHECK(first.primes == std::vector<Int>{7, 11, 13, 41});
    CHECK(first.korselt_ok);
    CHECK(first.residue_kL == 1);
    CHECK(first.residue_M == 0);

    CHECK(res.hits[1].primes == std::vector<Int>{7, 13, 31, 61});
    CHECK(res.hits[2].primes == std::vector<Int>{11, 31, 41, 61});

    for (const auto& h : res.hits) {
        CHECK(is_carmichael(h.n));
        CHECK(h.n % 120 == 1);
        for (const Int& p : h.primes) CHECK((h.n - 1) % (p - 1) == 0);
    }
}

TEST_CASE("divisor pool of 80 yields 561") {
    auto res = subset_product_search(kPool80, 80, 1, 1);
    CHECK(hit_values(res) == std::vector<Int>{561});
    CHECK(res.hits[0].primes == std::vector<Int>{3, 11, 17});
}

TEST_CASE("all three strategies agree on the worked pools") {
    for (const auto& pool : {kPool120, kPool80}) {
        Int kL(pool == kPool120 ? 120 : 80);
        auto ex = subset_product_search(pool, kL, 1, 1, with_strategy(SearchStrategy::exhaustive));
        auto mm = subset_product_search(pool, kL, 1, 1, with_strategy(SearchStrategy::meet_in_middle));
        auto dp = subset_product_search(pool, kL, 1, 1, with_strategy(SearchStrategy::residue_dp));
        CHECK(hit_values(ex) == hit_values(mm));
        CHECK(hit_values(ex) == hit_values(dp));
        CHECK(ex.strategy == "exhaustive");
        CHECK(mm.strategy == "mitm");
        CHECK(dp.strategy == "dp");
    }
}

TEST_CASE("empty pool, empty result") {
    auto res = subset_product_search(std::vector<uint64_t>{}, 120, 1, 1);
    CHECK(res.hits.empty());
}

TEST_CASE("class constraints filter hits") {
    // 41041, 172081, 852841 are 3, 7, 2 (mod 17)
    auto mod17 = subset_product_search(kPool120, 120, 3, 17);
    CHECK(hit_values(mod17) == std::vector<Int>{41041});
    CHECK(mod17.hits[0].residue_M == 3);

    // all three hits are 1 (mod 9), so class 2 (mod 9) is empty
    auto none = subset_product_search(kPool120, 120, 2, 9);
    CHECK(none.hits.empty());
}

TEST_CASE("pool precondition violations are named") {
    CHECK_THROWS_WITH(subset_product_search(std::vector<uint64_t>{7, 23}, 120, 1, 1),
                      Catch::Matchers::ContainsSubstring("23"));  // 22 does not divide 120
    CHECK_THROWS_WITH(subset_product_search(std::vector<uint64_t>{5, 7}, 120, 1, 1),
                      Catch::Matchers::ContainsSubstring("5"));  // 5 divides 120
    CHECK_THROWS_AS(subset_product_search(std::vector<uint64_t>{7, 9}, 120, 1, 1), pool_error);
    CHECK_THROWS_AS(subset_product_search(std::vector<uint64_t>{7, 7}, 120, 1, 1), pool_error);
}

TEST_CASE("subset size and hit caps") {
    SearchLimits small;
    small.max_subset = 3;
    CHECK(subset_product_search(kPool120, 120, 1, 1, small).hits.empty());  // hits need 4 primes

    SearchLimits one;
    one.max_hits = 1;
    auto res = subset_product_search(kPool120, 120, 1, 1, one);
    CHECK(hit_values(res) == std::vector<Int>{41041});  // smallest survives the cap
    CHECK(res.truncated);
}

TEST_CASE("oversized kL takes the bignum path") {
    Int kL = (Int(1) << 70) * 3 * 5;  // p-1 | kL for the pool, while no pool prime divides kL
    std::vector<uint64_t> pool{7, 11, 13};
    for (auto s : {SearchStrategy::exhaustive, SearchStrategy::meet_in_middle}) {
        auto res = subset_product_search(pool, kL, 1, 1, with_strategy(s));
        CHECK(res.hits.empty());  // products are far below kL, so never 1 (mod kL)
    }
    CHECK_THROWS_AS(subset_product_search(pool, kL, 1, 1, with_strategy(SearchStrategy::residue_dp)),
                    budget_error);
}

TEST_CASE("PrimePool overload") {
    auto pool = pool_from_divisors(1, factor(120));
    auto res = subset_product_search(pool, 120, 1, 1);
    CHECK(hit_values(res) == std::vector<Int>{41041, 172081, 852841});
}

TEST_CASE("strategy agreement on randomized pools") {
    std::mt19937_64 rng(101);
    const uint64_t small_primes[] = {2, 3, 5, 7, 11, 13};
    size_t total_hits = 0;
    int pools_tested = 0;
    while (pools_tested < 30) {
        uint64_t kL = 1;
        while (kL < 24) kL *= small_primes[rng() % 6];
        if (kL > 10000) continue;
        uint64_t M = std::vector<uint64_t>{1, 1, 2, 3, 5}[rng() % 5];
        std::vector<uint64_t> cand;
        for (const auto& pr : pool_from_divisors(1, factor(Int(static_cast<unsigned long>(kL)))).primes)
            if (std::gcd(pr.p, M) == 1) cand.push_back(pr.p);
        std::vector<uint64_t> pool;
        for (uint64_t p : cand)
            if (pool.size() < 20 && rng() % 3 != 0) pool.push_back(p);
        if (pool.size() < 3) continue;
        uint64_t a = 0;
        do { a = rng() % M; } while (std::gcd(a, M) != 1);
        ++pools_tested;

        Int kLi(static_cast<unsigned long>(kL)), Mi(static_cast<unsigned long>(M)),
            ai(static_cast<unsigned long>(a));
        auto ex = subset_product_search(pool, kLi, ai, Mi, with_strategy(SearchStrategy::exhaustive));
        auto mm = subset_product_search(pool, kLi, ai, Mi, with_strategy(SearchStrategy::meet_in_middle));
        auto dp = subset_product_search(pool, kLi, ai, Mi, with_strategy(SearchStrategy::residue_dp));
        CHECK(hit_values(ex) == hit_values(mm));
        CHECK(hit_values(ex) == hit_values(dp));
        total_hits += ex.hits.size();
        for (const auto& h : ex.hits) {
            CHECK(is_carmichael(h.n));
            CHECK(h.n % kLi == 1);
            CHECK(h.n % Mi == ai);
        }
    }
    CHECK(total_hits > 0);  // the sweep must not be vacuous
}

TEST_CASE("deterministic repetition") {
    auto a = subset_product_search(kPool120, 120, 1, 1);
    auto b = subset_product_search(kPool120, 120, 1, 1);
    REQUIRE(a.hits.size() == b.hits.size());
    for (size_t i = 0; i < a.hits.size(); ++i) {
        CHECK(a.hits[i].n == b.hits[i].n);
        CHECK(a.hits[i].primes == b.hits[i].primes);
    }
}
