#include "poincare/kloosterman.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "poincare/arith.hpp"
#include "poincare/errors.hpp"

namespace poincare::kloosterman {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct CompensatedComplex {
    double re = 0, im = 0, cre = 0, cim = 0;
    void add(std::complex<double> v) {
        double y = v.real() - cre;
        double t = re + y;
        cre = (t - re) - y;
        re = t;
        y = v.imag() - cim;
        t = im + y;
        cim = (t - im) - y;
        im = t;
    }
    std::complex<double> value() const { return {re, im}; }
};

std::uint64_t reduce_mod(std::int64_t x, std::uint64_t c) {
    std::int64_t r = x % static_cast<std::int64_t>(c);
    if (r < 0) r += static_cast<std::int64_t>(c);
    return static_cast<std::uint64_t>(r);
}

int valuation(std::uint64_t n, std::uint64_t p) {
    int v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

// sum over units a mod c of e((m a + n abar)/c) * extra_phase(a)
template <typename PhaseAt>
void unit_sum(std::int64_t m, std::int64_t n, std::uint64_t c, PhaseAt&& chi_phase,
              CompensatedComplex& acc, std::uint64_t& terms) {
    if (c == 1) {
        acc.add({1.0, 0.0});
        terms += 1;
        return;
    }
    std::uint64_t mr = reduce_mod(m, c), nr = reduce_mod(n, c);
    for (std::uint64_t a = 1; a < c; ++a) {
        if (std::gcd(a, c) != 1) continue;
        std::uint64_t abar = poincare::arith::mod_inverse(static_cast<std::int64_t>(a), c);
        std::uint64_t r = (arith::mul_mod(mr, a, c) + arith::mul_mod(nr, abar, c)) % c;
        chars::Phase ph;
        if (!chi_phase(a, ph)) continue;
        ph = chars::phase_add(ph, chars::phase_normalize(static_cast<std::int64_t>(r), static_cast<std::int64_t>(c)));
        acc.add(chars::phase_value(ph));
        ++terms;
    }
}

} // namespace

KloostermanValue direct(std::int64_t m, std::int64_t n, std::uint64_t c,
                        const chars::DirichletCharacter& chi) {
    if (c == 0 || c % chi.modulus() != 0)
        throw ModulusMismatch("kloosterman: character modulus " + std::to_string(chi.modulus()) +
                              " does not divide c=" + std::to_string(c));
    KloostermanValue out;
    out.modulus = c;
    CompensatedComplex acc;
    unit_sum(m, n, c, [&](std::uint64_t a, chars::Phase& ph) {
        return chi.phase_at(static_cast<std::int64_t>(a), ph);
    }, acc, out.term_count);
    out.value = acc.value();
    out.error_estimate = 4.0 * kEps * static_cast<double>(out.term_count + 1);
    return out;
}

KloostermanValue factored(std::int64_t m, std::int64_t n, std::uint64_t c,
                          const chars::DirichletCharacter& chi) {
    if (c == 0 || c % chi.modulus() != 0)
        throw ModulusMismatch("kloosterman: character modulus " + std::to_string(chi.modulus()) +
                              " does not divide c=" + std::to_string(c));
    KloostermanValue out;
    out.modulus = c;
    if (c == 1) {
        out.value = {1.0, 0.0};
        out.term_count = 1;
        out.error_estimate = 0.0;
        return out;
    }

    auto fac = poincare::arith::factorize(c);
    std::complex<double> value(1.0, 0.0);
    chars::Phase prefactor{};
    double scale = 1.0;
    std::uint64_t terms = 0;

    for (const auto& [p, l] : fac.factors) {
        std::uint64_t P = 1;
        for (int i = 0; i < l; ++i) P *= p;
        std::uint64_t D = c / P;
        // u = 1 mod P, 0 mod D: maps x to the residue (x mod P, 1 mod D)
        std::uint64_t u = (D == 1) ? 1
                                   : arith::mul_mod(D % c, poincare::arith::mod_inverse(static_cast<std::int64_t>(D % P), P), c);
        auto comp_phase = [&](std::uint64_t x, chars::Phase& ph) {
            std::uint64_t lifted = (D == 1) ? x % c
                                            : (1 + arith::mul_mod(reduce_mod(static_cast<std::int64_t>(x) - 1, c), u, c)) % c;
            return chi.phase_at(static_cast<std::int64_t>(lifted), ph);
        };

        // prefactor chi_P(D)
        if (D > 1) {
            chars::Phase ph;
            if (!comp_phase(D % P, ph)) {
                out.value = {0.0, 0.0}; // cannot happen: (D,P)=1
                return out;
            }
            prefactor = chars::phase_add(prefactor, ph);
        }
        // adjusted second argument: n * Dbar^2 mod P
        std::uint64_t n_adj;
        if (D == 1) {
            n_adj = reduce_mod(n, P);
        } else {
            std::uint64_t Dbar = poincare::arith::mod_inverse(static_cast<std::int64_t>(D % P), P);
            n_adj = arith::mul_mod(reduce_mod(n, P), arith::mul_mod(Dbar, Dbar, P), P);
        }

        // gcd reduction at this prime power
        int gamma = valuation(chi.conductor(), p);
        std::uint64_t mP = reduce_mod(m, P), nP = n_adj;
        int alpha = l;
        if (mP != 0) alpha = std::min(alpha, valuation(mP, p));
        if (nP != 0) alpha = std::min(alpha, valuation(nP, p));

        if (alpha == l) {
            // full character sum over units mod P
            if (gamma == 0) {
                std::uint64_t phi = P / p * (p - 1);
                scale *= static_cast<double>(phi);
                terms += 1;
            } else {
                out.value = {0.0, 0.0};
                out.term_count = terms;
                out.error_estimate = 0.0;
                return out;
            }
            continue;
        }

        int lp = l - alpha;
        if (gamma > lp) {
            // inner character sum vanishes
            out.value = {0.0, 0.0};
            out.term_count = terms;
            out.error_estimate = 0.0;
            return out;
        }

        std::uint64_t Pp = 1;
        for (int i = 0; i < lp; ++i) Pp *= p;
        std::uint64_t pa = P / Pp; // p^alpha
        std::int64_t mp = static_cast<std::int64_t>(mP / pa);
        std::int64_t np = static_cast<std::int64_t>(nP / pa);

        CompensatedComplex acc;
        unit_sum(mp, np, Pp, comp_phase, acc, terms);
        value *= acc.value();
        scale *= static_cast<double>(pa);
    }

    out.value = value * chars::phase_value(prefactor) * scale;
    out.term_count = terms;
    out.error_estimate = 8.0 * kEps * (static_cast<double>(terms) + 1.0) * std::max(1.0, std::abs(out.value));
    return out;
}

namespace {

double g_prime_power(std::uint64_t p, int gamma) {
    if (gamma <= 1) return 1.0;
    double e = (gamma % 2 == 0) ? gamma / 4.0 : (gamma + 1) / 4.0;
    return std::pow(static_cast<double>(p), e);
}

} // namespace

double weil_bound_value(std::int64_t m, std::int64_t n, std::uint64_t c, std::uint64_t q,
                        const chars::DirichletCharacter& chi) {
    std::uint64_t cq = c * q;
    std::uint64_t gm = static_cast<std::uint64_t>(m < 0 ? -m : m);
    std::uint64_t gn = static_cast<std::uint64_t>(n < 0 ? -n : n);
    std::uint64_t g3 = std::gcd(std::gcd(gm, gn), cq);
    if (g3 == 0) g3 = cq;
    return 4.0 * static_cast<double>(poincare::arith::divisor_count(cq)) *
           std::sqrt(static_cast<double>(g3)) * std::sqrt(static_cast<double>(cq)) *
           poincare::arith::g_function(chi.conductor());
}

double prime_power_bound_value(std::uint64_t p, int l, int gamma) {
    double two_p = (p == 2) ? 2.0 : 1.0;
    return 2.0 * two_p * two_p * std::pow(static_cast<double>(p), l / 2.0) * g_prime_power(p, gamma);
}

} // namespace poincare::kloosterman
