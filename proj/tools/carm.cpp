// carm: construct, count, and verify Carmichael numbers in residue classes.
//
// Subcommands: enumerate, count, construct, search, bounds, verify.
// Data goes to --out (default stdout), diagnostics to stderr.
// Exit codes: 0 ok, 1 usage, 2 budget exceeded, 3 invalid parameter,
// 4 empty sieve, 5 pool precondition, 6 I/O, 7 internal.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "carm/arith.hpp"
#include "carm/construction.hpp"
#include "carm/groups.hpp"
#include "carm/json_io.hpp"
#include "carm/korselt.hpp"
#include "carm/sieve.hpp"
#include "carm/subset_search.hpp"

namespace {

using carm::Int;
using carm::json;

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    void open(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path);
        if (!file) throw std::ios_base::failure("cannot open output file: " + path);
        os = &file;
    }
    std::ostream& stream() { return *os; }
};

Int parse_int(const std::string& s) {
    try {
        return Int(s);
    } catch (const std::invalid_argument&) {
        throw carm::domain_error("not a decimal integer: '" + s + "'");
    }
}

std::vector<Int> parse_int_list(const std::vector<std::string>& items) {
    std::vector<Int> out;
    for (const auto& s : items) out.push_back(parse_int(s));
    return out;
}

carm::SearchStrategy parse_strategy(const std::string& s) {
    if (s == "auto") return carm::SearchStrategy::automatic;
    if (s == "exhaustive") return carm::SearchStrategy::exhaustive;
    if (s == "mitm") return carm::SearchStrategy::meet_in_middle;
    if (s == "dp") return carm::SearchStrategy::residue_dp;
    throw carm::domain_error("unknown strategy '" + s + "'");
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const carm::budget_error& e) {
        std::cerr << "error (budget): " << e.what() << "\n";
        return 2;
    } catch (const carm::empty_sieve_error& e) {
        std::cerr << "error (empty sieve): " << e.what() << "\n";
        return 4;
    } catch (const carm::pool_error& e) {
        std::cerr << "error (pool): " << e.what() << "\n";
        return 5;
    } catch (const carm::domain_error& e) {
        std::cerr << "error (invalid parameter): " << e.what() << "\n";
        return 3;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error (io): " << e.what() << "\n";
        return 6;
    } catch (const std::exception& e) {
        std::cerr << "error (internal): " << e.what() << "\n";
        return 7;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Carmichael numbers in residue classes: sieve, construct, search, verify"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key-value config file; command-line flags override");

    std::function<void()> action;

    // ---- enumerate ----------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("enumerate", "list all Carmichael numbers <= X as JSON lines");
        auto X = std::make_shared<uint64_t>(0);
        auto out = std::make_shared<std::string>("-");
        auto workers = std::make_shared<unsigned>(0);
        auto budget = std::make_shared<uint64_t>(100000000);
        cmd->add_option("--X", *X, "upper bound")->required();
        cmd->add_option("--out", *out, "output path ('-' = stdout)");
        cmd->add_option("--workers", *workers, "parallel workers (0 = auto)");
        cmd->add_option("--budget", *budget, "enumeration budget");
        cmd->callback([=, &action] {
            action = [=] {
                carm::EnumerateOptions opts;
                opts.budget = *budget;
                opts.workers = *workers;
                auto records = carm::enumerate_carmichael(*X, opts);
                Output o;
                o.open(*out);
                for (const auto& rec : records) o.stream() << carm::record_json(rec).dump() << "\n";
                std::cerr << records.size() << " Carmichael numbers <= " << *X << "\n";
            };
        });
    }

    // ---- count --------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("count", "CSV table of C_{a,M}(X) over residue classes");
        auto X = std::make_shared<uint64_t>(0);
        auto M = std::make_shared<std::string>("1");
        auto a = std::make_shared<std::string>("");
        auto out = std::make_shared<std::string>("-");
        auto workers = std::make_shared<unsigned>(0);
        cmd->add_option("--X", *X, "upper bound")->required();
        cmd->add_option("--M", *M, "modulus")->required();
        cmd->add_option("--a", *a, "single residue (default: all residues 0..M-1)");
        cmd->add_option("--out", *out, "output path");
        cmd->add_option("--workers", *workers, "parallel workers");
        cmd->callback([=, &action] {
            action = [=] {
                Int Mv = parse_int(*M);
                if (Mv < 1) throw carm::domain_error("count: M must be >= 1");
                carm::EnumerateOptions opts;
                opts.workers = *workers;
                // one enumeration, then classify
                auto records = carm::enumerate_carmichael(*X, opts);
                Output o;
                o.open(*out);
                o.stream() << "X,a,M,count\n";
                auto emit = [&](const Int& av) {
                    uint64_t c = 0;
                    for (const auto& rec : records)
                        if (rec.n % Mv == av) ++c;
                    o.stream() << *X << "," << carm::to_decimal(av) << "," << carm::to_decimal(Mv)
                               << "," << c << "\n";
                };
                if (!a->empty()) {
                    Int av;
                    mpz_mod(av.get_mpz_t(), parse_int(*a).get_mpz_t(), Mv.get_mpz_t());
                    emit(av);
                } else {
                    for (Int av = 0; av < Mv; ++av) emit(av);
                }
            };
        });
    }

    // ---- construct ------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand(
            "construct", "run the sieve -> pairs -> k-selection -> group pipeline, JSON report");
        auto a = std::make_shared<std::string>("1");
        auto M = std::make_shared<std::string>("2");
        auto B = std::make_shared<double>(0.4);
        auto y = std::make_shared<double>(0);
        auto p_cap = std::make_shared<uint64_t>(0);
        auto L_override = std::make_shared<std::string>("");
        auto exclude = std::make_shared<std::vector<std::string>>();
        auto out = std::make_shared<std::string>("-");
        auto workers = std::make_shared<unsigned>(0);
        cmd->add_option("--a", *a, "target residue");
        cmd->add_option("--M", *M, "target modulus");
        cmd->add_option("--B", *B, "exponent parameter, 0 < B < 5/12");
        cmd->add_option("--y", *y, "sieve parameter");
        cmd->add_option("--p-cap", *p_cap, "cap on enumerated primes (0 = paper bound)");
        cmd->add_option("--L", *L_override, "explicit L, bypassing the sieve");
        cmd->add_option("--exclude", *exclude, "exceptional integers; smallest prime factor is removed from Q")
            ->delimiter(',');
        cmd->add_option("--out", *out, "output path");
        cmd->add_option("--workers", *workers, "parallel workers");
        cmd->callback([=, &action] {
            action = [=] {
                std::optional<uint64_t> cap;
                if (*p_cap > 0) cap = *p_cap;
                carm::ConstructionContext ctx;
                if (!L_override->empty()) {
                    std::cerr << "toy mode: L = " << *L_override << " supplied, sieve bypassed\n";
                    ctx = carm::make_context_with_L(parse_int(*a), parse_int(*M), *B,
                                                    carm::factor(parse_int(*L_override)), cap);
                } else {
                    if (*y <= 0) throw carm::domain_error("construct: --y or --L is required");
                    ctx = carm::make_context(parse_int(*a), parse_int(*M), *B, *y, cap,
                                             parse_int_list(*exclude), *workers);
                }
                carm::PairEnumOptions popts;
                popts.workers = *workers;
                auto pairs = carm::enumerate_pairs(ctx, popts);
                size_t valid = 0;
                for (const auto& pr : pairs)
                    if (carm::pair_is_valid(ctx, pr)) ++valid;
                auto pool = carm::select_k(ctx, pairs);
                auto G = carm::group_of(carm::factor(Int(static_cast<unsigned long>(pool.k))),
                                        carm::factor(ctx.M), ctx.L);

                json report;
                report["a"] = carm::to_decimal(ctx.a);
                report["M"] = carm::to_decimal(ctx.M);
                report["B"] = ctx.B;
                report["L"] = carm::to_decimal(ctx.L.value);
                report["log_x"] = ctx.log_x;
                report["pairs_total"] = pairs.size();
                report["pairs_valid"] = valid;
                if (ctx.Q) report["sieve"] = carm::diagnostics_json(carm::diagnostics_Q(*ctx.Q), *ctx.Q);
                report["pool"] = carm::pool_json(pool);
                report["group"] = carm::group_json(G);
                if (!ctx.toy_L) report["bounds"] = carm::bounds_json(carm::bounds_report(ctx, G, pool));
                Output o;
                o.open(*out);
                o.stream() << report.dump(2) << "\n";
                std::cerr << "pairs: " << pairs.size() << ", selected k = " << pool.k
                          << ", pool size " << pool.primes.size() << "\n";
            };
        });
    }

    // ---- search ----------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("search",
                                       "subset-product search for Carmichael hits, JSON lines");
        auto pool_divisors = std::make_shared<std::string>("");
        auto pool_primes = std::make_shared<std::vector<std::string>>();
        auto kL = std::make_shared<std::string>("");
        auto k = std::make_shared<uint64_t>(1);
        auto a = std::make_shared<std::string>("1");
        auto M = std::make_shared<std::string>("1");
        auto strategy = std::make_shared<std::string>("auto");
        auto max_hits = std::make_shared<uint64_t>(1000000);
        auto max_subset = std::make_shared<unsigned>(12);
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--pool-divisors", *pool_divisors,
                        "build the pool from primes p with p-1 | N, p not dividing N");
        cmd->add_option("--pool-primes", *pool_primes, "explicit pool primes")->delimiter(',');
        cmd->add_option("--kL", *kL, "search modulus (defaults to N in divisor mode)");
        cmd->add_option("--k", *k, "k for divisor pools (must divide N)");
        cmd->add_option("--a", *a, "target residue mod M");
        cmd->add_option("--M", *M, "class modulus");
        cmd->add_option("--strategy", *strategy, "auto|exhaustive|mitm|dp")
            ->check(CLI::IsMember({"auto", "exhaustive", "mitm", "dp"}));
        cmd->add_option("--max-hits", *max_hits, "emitted-hit cap");
        cmd->add_option("--max-subset", *max_subset, "subset size cap");
        cmd->add_option("--out", *out, "output path");
        cmd->callback([=, &action] {
            action = [=] {
                std::vector<uint64_t> primes;
                Int kLv;
                if (!pool_divisors->empty()) {
                    Int N = parse_int(*pool_divisors);
                    auto pool = carm::pool_from_divisors(*k, carm::factor(N));
                    for (const auto& pr : pool.primes) primes.push_back(pr.p);
                    kLv = kL->empty() ? N : parse_int(*kL);
                } else if (!pool_primes->empty()) {
                    if (kL->empty()) throw carm::domain_error("search: --kL is required with --pool-primes");
                    for (const auto& s : *pool_primes) primes.push_back(carm::to_u64(parse_int(s)));
                    std::sort(primes.begin(), primes.end());
                    kLv = parse_int(*kL);
                } else {
                    throw carm::domain_error("search: one of --pool-divisors or --pool-primes is required");
                }
                carm::SearchLimits lim;
                lim.strategy = parse_strategy(*strategy);
                lim.max_hits = *max_hits;
                lim.max_subset = *max_subset;
                auto res = carm::subset_product_search(primes, kLv, parse_int(*a), parse_int(*M), lim);
                Output o;
                o.open(*out);
                for (const auto& hit : res.hits) {
                    // independent re-verification before anything is written
                    bool ok = carm::fits_u64(hit.n)
                                  ? carm::is_carmichael(hit.n)
                                  : carm::korselt_criterion(carm::FactoredInteger::from_primes(hit.primes));
                    if (!ok) throw carm::error("search: hit failed independent re-verification");
                    o.stream() << carm::hit_json(hit, kLv).dump() << "\n";
                }
                std::cerr << res.hits.size() << " hits (strategy " << res.strategy << ")"
                          << (res.truncated ? ", truncated" : "") << "\n";
            };
        });
    }

    // ---- bounds ---------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("bounds",
                                       "group structure, Davenport and Baker-Schmidt bounds, JSON");
        auto k = std::make_shared<std::string>("1");
        auto M = std::make_shared<std::string>("2");
        auto L = std::make_shared<std::string>("");
        auto y = std::make_shared<double>(0);
        auto a = std::make_shared<std::string>("1");
        auto B = std::make_shared<double>(0.4);
        auto pool_size = std::make_shared<uint64_t>(0);
        auto t = std::make_shared<uint64_t>(0);
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--k", *k, "k part of the modulus");
        cmd->add_option("--M", *M, "M part of the modulus");
        cmd->add_option("--L", *L, "explicit L (otherwise sieved from --y)");
        cmd->add_option("--y", *y, "sieve parameter used to derive L");
        cmd->add_option("--a", *a, "residue, used with --y");
        cmd->add_option("--B", *B, "exponent parameter, used with --y");
        cmd->add_option("--pool-size", *pool_size, "pool size for the N count");
        cmd->add_option("--t", *t, "subsequence length for the N count");
        cmd->add_option("--out", *out, "output path");
        cmd->callback([=, &action] {
            action = [=] {
                carm::FactoredInteger Lf;
                if (!L->empty()) {
                    Lf = carm::factor(parse_int(*L));
                } else if (*y > 0) {
                    auto sc = carm::SieveContext::make(parse_int(*a), parse_int(*M), *B, *y);
                    Lf = carm::build_L(carm::build_Q0(sc));
                } else {
                    throw carm::domain_error("bounds: one of --L or --y is required");
                }
                auto G = carm::group_of(carm::factor(parse_int(*k)), carm::factor(parse_int(*M)), Lf);
                json report;
                report["group"] = carm::group_json(G);
                auto db = carm::davenport_bounds(G);
                report["davenport"] = {{"lower", carm::to_decimal(db.lower)}, {"upper", db.upper}};
                if (G.order <= 64) {
                    auto de = carm::davenport_exact(G);
                    report["davenport"]["exact"] = de.value;
                }
                if (G.order >= 2) {
                    auto s = carm::baker_schmidt_s(G, *y > 0 ? std::optional<double>(*y) : std::nullopt);
                    report["s_ln"] = s.value_ln;
                    if (s.le_e3y) report["s_le_e3y"] = *s.le_e3y;
                }
                report["lambda_L"] = carm::to_decimal(carm::carmichael_lambda(Lf));
                if (*pool_size > 0 && *t > 0) {
                    auto n_G = carm::to_u64(db.lower);  // n(G) >= lambda(G); use the floor
                    auto cn = carm::count_N(*pool_size, n_G, *t);
                    report["log_N"] = cn.log_N;
                    report["log_N_chain"] = cn.chain_lower_ln;
                }
                Output o;
                o.open(*out);
                o.stream() << report.dump(2) << "\n";
            };
        });
    }

    // ---- verify -----------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("verify", "Korselt-verify numbers, JSON lines");
        auto ns = std::make_shared<std::vector<std::string>>();
        auto in = std::make_shared<std::string>("");
        auto spot = std::make_shared<unsigned>(0);
        auto seed = std::make_shared<uint64_t>(1);
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--n", *ns, "numbers to verify")->delimiter(',');
        cmd->add_option("--in", *in, "JSON-lines file with records {\"n\": ...}");
        cmd->add_option("--spot-bases", *spot, "extra random Fermat spot checks per number");
        cmd->add_option("--seed", *seed, "seed for the spot checks");
        cmd->add_option("--out", *out, "output path");
        cmd->callback([=, &action] {
            action = [=] {
                std::vector<Int> values = parse_int_list(*ns);
                if (!in->empty()) {
                    std::ifstream f(*in);
                    if (!f) throw std::ios_base::failure("cannot open input file: " + *in);
                    std::string line;
                    while (std::getline(f, line)) {
                        if (line.empty()) continue;
                        values.push_back(parse_int(json::parse(line).at("n").get<std::string>()));
                    }
                }
                if (values.empty()) throw carm::domain_error("verify: nothing to verify");
                Output o;
                o.open(*out);
                std::mt19937_64 rng(*seed);
                for (const Int& n : values) {
                    json rec;
                    rec["n"] = carm::to_decimal(n);
                    bool carmichael = carm::is_carmichael(n);
                    rec["carmichael"] = carmichael;
                    if (carmichael) {
                        json fs = json::array();
                        for (const auto& [p, e] : carm::factor(n).factors) {
                            (void)e;
                            fs.push_back(carm::to_decimal(p));
                        }
                        rec["factors"] = fs;
                    }
                    if (*spot > 0) {
                        bool ok = true;
                        for (unsigned i = 0; i < *spot; ++i) {
                            Int b(static_cast<unsigned long>(rng()));
                            b = b % n;
                            if (carm::mod_pow(b, n, n) != b) { ok = false; break; }
                        }
                        rec["fermat_spot"] = ok;
                    }
                    o.stream() << rec.dump() << "\n";
                }
            };
        });
    }

    CLI11_PARSE(app, argc, argv);
    return run_guarded(action);
}
