#include "poincare/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "poincare/errors.hpp"

namespace poincare::arith {

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    if (m == 1) return 0;
    std::uint64_t result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

namespace {

bool witness_composite(std::uint64_t n, std::uint64_t a, std::uint64_t d, int r) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) return false;
    for (int i = 1; i < r; ++i) {
        x = mul_mod(x, x, n);
        if (x == n - 1) return false;
    }
    return true;
}

} // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    // This witness set decides primality for every n < 2^64.
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (witness_composite(n, a, d, r)) return false;
    }
    return true;
}

namespace {

std::uint64_t pollard_rho(std::uint64_t n) {
    if (n % 2 == 0) return 2;
    for (std::uint64_t c = 1;; ++c) {
        std::uint64_t x = 2, y = 2, d = 1;
        while (d == 1) {
            x = (mul_mod(x, x, n) + c) % n;
            y = (mul_mod(y, y, n) + c) % n;
            y = (mul_mod(y, y, n) + c) % n;
            d = std::gcd(x > y ? x - y : y - x, n);
        }
        if (d != n) return d;
    }
}

void factor_into(std::uint64_t n, std::vector<std::uint64_t>& primes) {
    if (n == 1) return;
    if (is_prime(n)) {
        primes.push_back(n);
        return;
    }
    std::uint64_t d = pollard_rho(n);
    factor_into(d, primes);
    factor_into(n / d, primes);
}

} // namespace

Factorization factorize(std::uint64_t n) {
    Factorization result;
    result.n = n;
    if (n <= 1) return result;

    std::vector<std::uint64_t> primes;
    std::uint64_t rest = n;
    for (std::uint64_t p = 2; p <= 100000 && p * p <= rest; p == 2 ? p = 3 : p += 2) {
        while (rest % p == 0) {
            primes.push_back(p);
            rest /= p;
        }
    }
    factor_into(rest, primes);
    std::sort(primes.begin(), primes.end());

    for (std::size_t i = 0; i < primes.size();) {
        std::size_t j = i;
        while (j < primes.size() && primes[j] == primes[i]) ++j;
        result.factors.push_back({primes[i], static_cast<int>(j - i)});
        i = j;
    }
    return result;
}

std::uint64_t largest_square_divisor(std::uint64_t n) {
    std::uint64_t f = 1;
    for (const auto& [p, a] : factorize(n).factors) {
        int e = (a % 2 == 0) ? a : a - 1;
        for (int i = 0; i < e; ++i) f *= p;
    }
    return f;
}

std::uint64_t squarefree_part(std::uint64_t n) {
    std::uint64_t alpha = 1;
    for (const auto& [p, a] : factorize(n).factors) {
        if (a % 2 == 1) alpha *= p;
    }
    return alpha;
}

double g_function(const Factorization& fac) {
    double g = 1.0;
    for (const auto& [p, a] : fac.factors) {
        if (a == 1) continue;
        double e = (a % 2 == 0) ? a / 4.0 : (a + 1) / 4.0;
        g *= std::pow(static_cast<double>(p), e);
    }
    return g;
}

double g_function(std::uint64_t n) { return g_function(factorize(n)); }

std::uint64_t divisor_count(std::uint64_t n) {
    std::uint64_t d = 1;
    for (const auto& [p, a] : factorize(n).factors) d *= static_cast<std::uint64_t>(a) + 1;
    return d;
}

std::uint64_t euler_phi(std::uint64_t n) {
    std::uint64_t phi = 1;
    for (const auto& [p, a] : factorize(n).factors) {
        std::uint64_t pk = 1;
        for (int i = 0; i < a - 1; ++i) pk *= p;
        phi *= pk * (p - 1);
    }
    return phi;
}

std::uint64_t mod_inverse(std::int64_t a, std::uint64_t c) {
    if (c == 1) return 0;
    std::int64_t m = static_cast<std::int64_t>(c);
    std::int64_t r = a % m;
    if (r < 0) r += m;
    // extended Euclid on (r, m)
    std::int64_t old_r = r, cur_r = m;
    std::int64_t old_s = 1, cur_s = 0;
    while (cur_r != 0) {
        std::int64_t quot = old_r / cur_r;
        std::int64_t t = old_r - quot * cur_r;
        old_r = cur_r;
        cur_r = t;
        t = old_s - quot * cur_s;
        old_s = cur_s;
        cur_s = t;
    }
    if (old_r != 1)
        throw NotInvertible("mod_inverse: gcd(" + std::to_string(a) + ", " + std::to_string(c) + ") > 1");
    if (old_s < 0) old_s += m;
    return static_cast<std::uint64_t>(old_s);
}

std::pair<std::uint64_t, std::uint64_t>
crt_combine(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& congruences) {
    std::uint64_t r = 0, m = 1;
    for (const auto& [ri, mi] : congruences) {
        if (std::gcd(m, mi) != 1)
            throw NonCoprimeModuli("crt_combine: moduli are not pairwise coprime");
        // x = r mod m, x = ri mod mi  ->  x = r + m * t with t = (ri - r)/m mod mi
        std::uint64_t mm = m * mi;
        std::uint64_t diff = ((ri % mi) + mi - (r % mi)) % mi;
        std::uint64_t t = mul_mod(diff, mod_inverse(static_cast<std::int64_t>(m % mi), mi), mi);
        r = r + m * t;
        m = mm;
    }
    return {r, m};
}

} // namespace poincare::arith
