#pragma once

#include <complex>
#include <cstdint>

#include "poincare/characters.hpp"

namespace poincare::kloosterman {

struct KloostermanValue {
    std::complex<double> value;
    std::uint64_t modulus = 1;
    std::uint64_t term_count = 0;
    double error_estimate = 0.0;
};

// S_chi(m,n;c) = sum over units a mod c of chi(a) e((m a + n abar)/c),
// with chi of modulus q | c extended by chi(a) := chi(a mod q).
// Direct summation; exponents are reduced mod c in integer arithmetic.
KloostermanValue direct(std::int64_t m, std::int64_t n, std::uint64_t c,
                        const chars::DirichletCharacter& chi);

// Same value via CRT factorization into prime powers, the gcd reduction
// S_chi(m,n;p^l) = p^a S_chi(m',n';p^{l-a}) when the conductor divides
// p^{l-a}, and exact zero in the annihilation case.
KloostermanValue factored(std::int64_t m, std::int64_t n, std::uint64_t c,
                          const chars::DirichletCharacter& chi);

// Right-hand side of the Weil-type bound for modulus cq:
// 4 sigma0(cq) (m,n,cq)^{1/2} (cq)^{1/2} g(q') with q' the conductor of chi.
double weil_bound_value(std::int64_t m, std::int64_t n, std::uint64_t c, std::uint64_t q,
                        const chars::DirichletCharacter& chi);

// Prime-power variant 2 (2,p)^2 p^{l/2} g(p^gamma).
double prime_power_bound_value(std::uint64_t p, int l, int gamma);

} // namespace poincare::kloosterman
