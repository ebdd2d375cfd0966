#include <catch2/catch_amalgamated.hpp>

#include "carm/construction.hpp"

using namespace carm;

namespace {

ConstructionContext toy15(std::optional<uint64_t> cap) {
    return make_context_with_L(1, 2, 0.4, factor(15), cap);
}

std::vector<uint64_t> pool_prime_values(const PrimePool& pool) {
    std::vector<uint64_t> v;
    for (const auto& pr : pool.primes) v.push_back(pr.p);
    return v;
}

}  // namespace

TEST_CASE("make_context from the sieve") {
    auto ctx = make_context(1, 2, 0.4, 10, 1000000);
    CHECK(ctx.L.value == 278597);
    CHECK(ctx.L_primes == std::vector<uint64_t>{11, 19, 31, 43});
    CHECK_THAT(ctx.log_x, Catch::Matchers::WithinRel(33.076671881758664, 1e-12));
    CHECK(ctx.Q.has_value());
    CHECK_FALSE(ctx.toy_L);

    CHECK_THROWS_AS(make_context(1, 2, 5.0 / 12.0, 10), domain_error);
    CHECK_THROWS_AS(make_context(2, 4, 0.4, 10), domain_error);
    CHECK_THROWS_AS(make_context(1, 2, 0.4, 2.5), empty_sieve_error);
}

TEST_CASE("make_context applies exceptional exclusions") {
    auto ctx = make_context(1, 2, 0.4, 10, 1000000, {Int(437)});  // drops 19
    CHECK(ctx.L_primes == std::vector<uint64_t>{11, 31, 43});
    CHECK(ctx.L.value == 11 * 31 * 43);
    REQUIRE(ctx.Q);
    CHECK(ctx.Q->removed.size() == 1);
}

TEST_CASE("toy L override") {
    auto ctx = toy15(200);
    CHECK(ctx.toy_L);
    CHECK(ctx.L_primes == std::vector<uint64_t>{3, 5});
    CHECK_THAT(ctx.log_x, Catch::Matchers::WithinRel(8.502993454155389, 1e-12));

    CHECK_THROWS_AS(make_context_with_L(1, 2, 0.4, factor(12), 100), domain_error);  // even, square
    CHECK_THROWS_AS(make_context_with_L(1, 2, 0.4, factor(9), 100), domain_error);   // 3^2
    CHECK_THROWS_AS(make_context_with_L(1, 3, 0.4, factor(15), 100), domain_error);  // 3 | M and 3 | L
}

TEST_CASE("enumerate_pairs on the toy modulus, capped") {
    auto pairs = enumerate_pairs(toy15(200));
    REQUIRE(pairs.size() == 4);
    // ordered by (d, p)
    CHECK(pairs[0].d == 3);
    CHECK(pairs[0].p == 79);
    CHECK(pairs[0].k == 26);
    CHECK(pairs[1].p == 139);
    CHECK(pairs[2].d == 15);
    CHECK(pairs[2].p == 31);
    CHECK(pairs[2].k == 2);
    CHECK(pairs[3].p == 61);
}

TEST_CASE("enumerate_pairs without a cap uses the paper bound") {
    auto ctx = toy15(std::nullopt);
    auto pairs = enumerate_pairs(ctx);
    CHECK(pairs.size() == 30);  // frozen from an independent scan
    CHECK(pairs.back().p == 2371);
    for (const auto& pr : pairs) CHECK(pair_is_valid(ctx, pr));
}

TEST_CASE("pair soundness, all five predicates re-validated") {
    auto ctx = toy15(200);
    for (const auto& pr : enumerate_pairs(ctx)) CHECK(pair_is_valid(ctx, pr));

    // doctored pairs must fail
    CHECK_FALSE(pair_is_valid(ctx, {31, 15, 3}));   // p != dk+1
    CHECK_FALSE(pair_is_valid(ctx, {33, 15, 2}));   // not prime
    CHECK_FALSE(pair_is_valid(ctx, {31, 5, 6}));    // k not coprime to L
    CHECK_FALSE(pair_is_valid(ctx, {7, 3, 2}));     // 7 = 2 (mod 5) is not a QR mod 5
}

TEST_CASE("enumerate_pairs determinism across worker counts") {
    auto ctx = toy15(std::nullopt);
    PairEnumOptions one;
    one.workers = 1;
    auto ref = enumerate_pairs(ctx, one);
    for (unsigned w : {2u, 4u, 7u}) {
        PairEnumOptions opts;
        opts.workers = w;
        auto got = enumerate_pairs(ctx, opts);
        REQUIRE(got.size() == ref.size());
        for (size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].p == ref[i].p);
            CHECK(got[i].d == ref[i].d);
        }
    }
}

TEST_CASE("select_k maximizes representations, smallest k on ties") {
    auto capped = select_k(toy15(200), enumerate_pairs(toy15(200)));
    CHECK(capped.k == 2);  // all counts 1; smallest k wins
    CHECK(pool_prime_values(capped) == std::vector<uint64_t>{31});

    auto full = select_k(toy15(std::nullopt), enumerate_pairs(toy15(std::nullopt)));
    CHECK(full.k == 46);  // counts 2 for k = 46 and k = 116; tie broken downward
    CHECK(pool_prime_values(full) == std::vector<uint64_t>{139, 691});

    CHECK_THROWS_AS(select_k(toy15(200), {}), domain_error);
}

TEST_CASE("select_k recount on the full y=10 pipeline") {
    auto ctx = make_context(1, 2, 0.4, 10, 1000000);
    auto pairs = enumerate_pairs(ctx);
    CHECK(pairs.size() == 4724);
    auto pool = select_k(ctx, pairs);
    CHECK(pool.k == 36);
    CHECK(pool_prime_values(pool) == std::vector<uint64_t>{397, 17029, 527869, 911773});
    CHECK(pool.eq5_satisfied);
    CHECK_THAT(pool.eq5_bound, Catch::Matchers::WithinRel(0.03826337197781906, 1e-12));
    CHECK(pool.cap_binding);

    // exhaustive recount confirms optimality
    std::map<uint64_t, size_t> recount;
    for (const auto& pr : pairs) ++recount[pr.k];
    size_t total = 0;
    for (const auto& [k, c] : recount) {
        total += c;
        CHECK(c <= recount.at(pool.k));
        if (c == recount.at(pool.k)) CHECK(k >= pool.k);
    }
    CHECK(total == pairs.size());
    CHECK(recount.at(pool.k) == pool.primes.size());
}

TEST_CASE("pool primes reconstruct as p = dk + 1 with d | L") {
    auto ctx = make_context(1, 2, 0.4, 10, 1000000);
    auto pool = select_k(ctx, enumerate_pairs(ctx));
    std::vector<uint64_t> seen;
    for (const auto& pr : pool.primes) {
        CHECK(pr.p == pr.d * pool.k + 1);
        CHECK(mpz_divisible_ui_p(ctx.L.value.get_mpz_t(), pr.d));
        seen.push_back(pr.p);
    }
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("pool_from_divisors") {
    CHECK(pool_prime_values(pool_from_divisors(1, factor(120))) ==
          std::vector<uint64_t>{7, 11, 13, 31, 41, 61});
    CHECK(pool_prime_values(pool_from_divisors(1, factor(80))) ==
          std::vector<uint64_t>{3, 11, 17, 41});
    CHECK(pool_prime_values(pool_from_divisors(1, factor(2))) == std::vector<uint64_t>{3});

    auto filtered = pool_from_divisors(1, factor(120), std::pair<Int, Int>{1, 3});
    CHECK(pool_prime_values(filtered) == std::vector<uint64_t>{7, 13, 31, 61});

    auto k2 = pool_from_divisors(2, factor(80));
    CHECK(pool_prime_values(k2) == std::vector<uint64_t>{3, 11, 17, 41});
    for (const auto& pr : k2.primes) CHECK(pr.p == 2 * pr.d + 1);

    CHECK_THROWS_AS(pool_from_divisors(1, factor(1)), domain_error);
    CHECK_THROWS_AS(pool_from_divisors(7, factor(120)), domain_error);  // 7 does not divide 120
}

TEST_CASE("divisor pool with N = kL covers the enumerated pairs") {
    for (auto cap : {std::optional<uint64_t>(200), std::optional<uint64_t>(std::nullopt)}) {
        auto ctx = toy15(cap);
        auto pairs = enumerate_pairs(ctx);
        std::map<uint64_t, std::vector<uint64_t>> by_k;
        for (const auto& pr : pairs) by_k[pr.k].push_back(pr.p);
        for (const auto& [k, ps] : by_k) {
            auto super = pool_prime_values(pool_from_divisors(k, factor(Int(15 * k))));
            for (uint64_t p : ps)
                CHECK(std::find(super.begin(), super.end(), p) != super.end());
        }
    }
}

TEST_CASE("uncapped enumeration out of desk range demands a cap") {
    auto ctx = make_context(1, 2, 0.4, 10);  // L*x^{0.6} is astronomically large
    CHECK_THROWS_WITH(enumerate_pairs(ctx), Catch::Matchers::ContainsSubstring("p_cap"));
}
