#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace poincare::arith {

struct PrimePower {
    std::uint64_t prime;
    int exponent;
    bool operator==(const PrimePower&) const = default;
};

// Prime factorization with primes strictly increasing. factorize(1) has an
// empty factor list.
struct Factorization {
    std::uint64_t n = 1;
    std::vector<PrimePower> factors;
};

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);

// Deterministic Miller-Rabin, valid for all n < 2^64.
bool is_prime(std::uint64_t n);

// Trial division plus Pollard rho for stray large factors; inputs are
// desk-scale (<= 2^63) per the library contract.
Factorization factorize(std::uint64_t n);

// f(n): the largest square divisor, multiplicative with
// f(p^a) = p^a (a even), p^{a-1} (a odd).
std::uint64_t largest_square_divisor(std::uint64_t n);

// alpha(n) = n / f(n): the product of primes dividing n with odd multiplicity.
std::uint64_t squarefree_part(std::uint64_t n);

// g(p) = 1, g(p^a) = p^{a/4} for even a >= 2, p^{(a+1)/4} for odd a >= 3.
double g_function(std::uint64_t n);
double g_function(const Factorization& f);

std::uint64_t divisor_count(std::uint64_t n);
std::uint64_t euler_phi(std::uint64_t n);

// Inverse of a mod c, result in [0, c). Throws NotInvertible when gcd(a,c)>1.
std::uint64_t mod_inverse(std::int64_t a, std::uint64_t c);

// Solves the simultaneous congruences x = r_i mod m_i for pairwise coprime
// moduli; returns (x, prod m_i). Throws NonCoprimeModuli otherwise.
std::pair<std::uint64_t, std::uint64_t>
crt_combine(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& congruences);

} // namespace poincare::arith
