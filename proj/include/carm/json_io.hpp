#pragma once

#include <json.hpp>

#include "carm/groups.hpp"
#include "carm/korselt.hpp"
#include "carm/sieve.hpp"
#include "carm/subset_search.hpp"

// JSON views of the library types. Exact integers are decimal strings;
// log-space reals carry an _ln suffix.

namespace carm {

using json = nlohmann::json;

inline json to_json(const FactoredInteger& f) {
    json factors = json::array();
    for (const auto& [p, e] : f.factors) factors.push_back({{"p", to_decimal(p)}, {"e", e}});
    return {{"value", to_decimal(f.value)}, {"factors", factors}};
}

inline json record_json(const CarmichaelRecord& rec) {
    json factors = json::array();
    for (const auto& [p, e] : rec.factors.factors) {
        (void)e;
        factors.push_back(to_decimal(p));
    }
    return {{"n", to_decimal(rec.n)}, {"factors", factors}};
}

inline json hit_json(const CarmichaelHit& hit, const Int& kL) {
    json factors = json::array();
    for (const Int& p : hit.primes) factors.push_back(to_decimal(p));
    return {{"n", to_decimal(hit.n)},      {"factors", factors},
            {"kL", to_decimal(kL)},        {"a", to_decimal(hit.a)},
            {"M", to_decimal(hit.M)},      {"strategy", hit.strategy},
            {"korselt", hit.korselt_ok},   {"n_mod_kL", to_decimal(hit.residue_kL)},
            {"n_mod_M", to_decimal(hit.residue_M)}};
}

inline json diagnostics_json(const SieveDiagnostics& d, const SmoothPrimeSet& Q) {
    json primes = json::array();
    for (uint64_t q : Q.primes) primes.push_back(std::to_string(q));
    json removed = json::array();
    for (const auto& [q, reason] : Q.removed)
        removed.push_back({{"q", std::to_string(q)}, {"reason", reason}});
    return {{"y", d.y},
            {"mu", to_decimal(d.mu)},
            {"interval_hi", std::to_string(d.interval_hi)},
            {"count", d.count},
            {"predicted", d.predicted},
            {"ratio", d.ratio},
            {"reciprocal_sum", d.reciprocal_sum},
            {"nonsmooth_rejected", d.nonsmooth_rejected},
            {"primes", primes},
            {"removed", removed}};
}

inline json pool_json(const PrimePool& pool, size_t histogram_cap = 32) {
    json primes = json::array();
    for (const auto& pr : pool.primes)
        primes.push_back({{"p", std::to_string(pr.p)}, {"d", std::to_string(pr.d)}});
    // top of the representation histogram, by count then k
    std::vector<std::pair<uint64_t, size_t>> hist(pool.counts.begin(), pool.counts.end());
    std::sort(hist.begin(), hist.end(), [](const auto& l, const auto& r) {
        return l.second != r.second ? l.second > r.second : l.first < r.first;
    });
    json histogram = json::array();
    for (size_t i = 0; i < hist.size() && i < histogram_cap; ++i)
        histogram.push_back({{"k", std::to_string(hist[i].first)}, {"count", hist[i].second}});
    return {{"k", std::to_string(pool.k)},
            {"pool_size", pool.primes.size()},
            {"eq5_bound", pool.eq5_bound},
            {"eq5_satisfied", pool.eq5_satisfied},
            {"cap_binding", pool.cap_binding},
            {"distinct_k", pool.counts.size()},
            {"histogram", histogram},
            {"primes", primes}};
}

inline json group_json(const GroupSpec& G) {
    json invs = json::array();
    for (const Int& f : G.invariant_factors) invs.push_back(to_decimal(f));
    return {{"k", to_decimal(G.k.value)},
            {"M", to_decimal(G.M.value)},
            {"L", to_decimal(G.L.value)},
            {"invariant_factors", invs},
            {"order", to_decimal(G.order)},
            {"exponent", to_decimal(G.exponent)}};
}

inline json bounds_json(const BoundsReport& r) {
    json j{{"y", r.y},
           {"pi_y", r.pi_y},
           {"n_lower", to_decimal(r.n_lower)},
           {"n_upper", r.n_upper},
           {"eq6_ln", r.eq6_ln},
           {"e2y_ln", r.e2y_ln},
           {"eq6_le_e2y", r.eq6_le_e2y},
           {"lambda_L", to_decimal(r.lambda_L)},
           {"lambda_L_bound", to_decimal(r.lambda_L_bound)},
           {"lambda_ok", r.lambda_ok},
           {"s_ln", r.s_ln},
           {"s_le_e3y", r.s_le_e3y},
           {"t_ln", r.t_ln},
           {"log_x", r.log_x},
           {"log_X", r.log_X}};
    if (r.N) {
        j["log_N"] = r.N->log_N;
        j["log_N_chain"] = r.N->chain_lower_ln;
    } else {
        j["log_N"] = nullptr;
        j["log_N_reason"] = r.N_unavailable_reason;
    }
    return j;
}

}  // namespace carm
