#pragma once

#include <stdexcept>
#include <string>

namespace carm {

// Base class for everything this library throws on purpose.
struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument: out-of-range parameter, violated coprimality, bad residue, ...
struct domain_error : error {
    explicit domain_error(const std::string& what) : error(what) {}
};

// A configured work budget (factoring, sieving, enumeration, search) would be
// exceeded. Never accompanied by a partial result.
struct budget_error : error {
    explicit budget_error(const std::string& what) : error(what) {}
};

// The smooth-prime sieve produced no primes, so L cannot be formed.
struct empty_sieve_error : error {
    explicit empty_sieve_error(const std::string& what) : error(what) {}
};

// A pool prime fails a search precondition (p-1 | kL, coprimality).
struct pool_error : error {
    explicit pool_error(const std::string& what) : error(what) {}
};

}  // namespace carm
