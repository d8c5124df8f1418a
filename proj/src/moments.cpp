#include "poincare/moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "poincare/arith.hpp"
#include "poincare/bessel.hpp"
#include "poincare/errors.hpp"
#include "poincare/kloosterman.hpp"
#include "poincare/parallel.hpp"
#include "poincare/quadrature.hpp"
#include "poincare/smoothfn.hpp"

namespace poincare::moments {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

std::complex<double> quarter_turn(std::complex<double> z, int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return z;
        case 1: return {-z.imag(), z.real()};
        case 2: return -z;
        default: return {z.imag(), -z.real()};
    }
}

// ||P~||^2 - 1 together with its certified error, via delta_series.
std::pair<double, double> norm_minus_one(int k, std::uint64_t m,
                                         const chars::DirichletCharacter& chi,
                                         const series::DeltaOptions& opts) {
    auto delta = series::delta_series(k, m, m, chi, opts);
    auto rotated = quarter_turn(delta.value, k);
    double x = kTwoPi * rotated.real();
    double err = kTwoPi * (delta.tail_bound + delta.float_error + std::abs(rotated.imag()));
    return {x, err};
}

// min(1, uniform order bound, first-term-dominated bound) for |J_{k-1}(z)|
double j_cheap_bound(int order, double z) {
    double b = 1.0;
    if (order >= 2) b = std::min(b, 0.85 / std::cbrt(static_cast<double>(order)));
    if (z < 2.0 * std::sqrt(order + 1.0)) {
        if (z <= 0.0) return order == 0 ? 1.0 : 0.0;
        double lb = order * std::log(z / 2.0) - bessel::log_factorial(order);
        if (lb < 690.0) b = std::min(b, std::exp(lb));
    }
    return b;
}

// sum_{c > C} (base/c)^{p} <= (base/(C+1))^p + integral comparison, log space
double power_tail(double log_base_num, double p, std::uint64_t C) {
    double lc = std::log(static_cast<double>(C + 1));
    double l1 = p * log_base_num - p * lc;
    double l2 = p * log_base_num - (p - 1.0) * lc - std::log(p - 1.0);
    double t1 = l1 > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(l1);
    double t2 = l2 > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(l2);
    return t1 + t2;
}

} // namespace

// ---------------------------------------------------------------------------
// Direct moments
// ---------------------------------------------------------------------------

MomentSide sigma_k_direct(std::uint64_t K, std::uint64_t m, const chars::DirichletCharacter& chi,
                          const MomentOptions& opts) {
    if (K < 6) throw RangeExceeded("sigma_k_direct: K must be >= 6");
    int delta = chi.parity();
    std::vector<std::uint64_t> ks;
    for (std::uint64_t k = K / 2; k <= 3 * K + 1; ++k) {
        if (k % 2 != static_cast<std::uint64_t>(delta) || k < 3) continue;
        if (smoothfn::u_eval((static_cast<double>(k) - 1.0) / static_cast<double>(K)) > 0.0)
            ks.push_back(k);
    }
    auto per_k = parallel::map_indexed<std::array<double, 2>>(ks.size(), opts.workers, [&](std::size_t i) {
        auto [x, err] = norm_minus_one(static_cast<int>(ks[i]), m, chi, opts.delta);
        double w = smoothfn::u_eval((static_cast<double>(ks[i]) - 1.0) / static_cast<double>(K));
        return std::array<double, 2>{w * x * x, w * (2.0 * std::abs(x) * err + err * err)};
    });
    MomentSide side;
    std::vector<double> vals(ks.size()), errs(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        vals[i] = per_k[i][0];
        errs[i] = per_k[i][1];
        side.terms.push_back({static_cast<std::int64_t>(ks[i]), 0, 2.0 / K * per_k[i][0]});
    }
    side.value = 2.0 / static_cast<double>(K) * parallel::tree_sum(vals);
    side.certified_error = 2.0 / static_cast<double>(K) * parallel::tree_sum(errs) +
                           kEps * std::abs(side.value) * static_cast<double>(ks.size());
    side.heuristic_tail = 0.0;
    return side;
}

MomentSide sigma_m_direct(std::uint64_t M, int k, const chars::DirichletCharacter& chi,
                          const MomentOptions& opts) {
    if (k < 3) throw WeightTooSmall("sigma_m_direct: weight must be >= 3");
    if (chi.parity() != (k % 2))
        throw ParityMismatch("sigma_m_direct: character parity does not match the weight");
    std::vector<std::uint64_t> ms;
    for (std::uint64_t m = std::max<std::uint64_t>(1, M / 2); m <= 3 * M; ++m)
        if (smoothfn::u_eval(static_cast<double>(m) / static_cast<double>(M)) > 0.0) ms.push_back(m);
    auto per_m = parallel::map_indexed<std::array<double, 2>>(ms.size(), opts.workers, [&](std::size_t i) {
        auto [x, err] = norm_minus_one(k, ms[i], chi, opts.delta);
        double w = smoothfn::u_eval(static_cast<double>(ms[i]) / static_cast<double>(M));
        return std::array<double, 2>{w * x * x, w * (2.0 * std::abs(x) * err + err * err)};
    });
    MomentSide side;
    std::vector<double> vals(ms.size()), errs(ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i) {
        vals[i] = per_m[i][0];
        errs[i] = per_m[i][1];
        side.terms.push_back({static_cast<std::int64_t>(ms[i]), 0, per_m[i][0] / static_cast<double>(M)});
    }
    side.value = parallel::tree_sum(vals) / static_cast<double>(M);
    side.certified_error = parallel::tree_sum(errs) / static_cast<double>(M) +
                           kEps * std::abs(side.value) * static_cast<double>(ms.size());
    return side;
}

// ---------------------------------------------------------------------------
// Oscillatory integrals (weight side)
// ---------------------------------------------------------------------------

OscIntegral i_pm_integral(double K, double x1, double x2, PmSign sign, double tol) {
    const auto& window = smoothfn::SmoothWindow::shared();
    double s_star = window.truncation_point(1e-13);
    double T = s_star / K;
    double trunc = window.tail_mass(s_star) / K;
    double s = (sign == PmSign::Minus) ? -1.0 : 1.0;
    auto integrand = [&](double t) {
        double arg2 = x1 * x1 + x2 * x2 + s * 2.0 * x1 * x2 * std::cos(kTwoPi * t);
        double j0 = bessel::j0_fast(std::sqrt(std::max(0.0, arg2)));
        return 2.0 * window.u_hat_cached(K * t).real() * j0;
    };
    // J_0 phase rate is at most 2 pi sqrt(x1 x2); one unit covers cos(2 pi t)
    double freq = std::sqrt(std::max(x1 * x2, 0.0)) + 1.0;
    int init = std::max(2, static_cast<int>(std::ceil(T * freq / 3.0)));
    auto r = quadrature::gl_adaptive(integrand, 0.0, T, tol, init, std::max(1 << 14, init * 16));
    return {r.value, r.error_estimate, trunc};
}

OscIntegral osc_integral_pm(std::uint64_t m, std::uint64_t K, std::uint64_t q, std::uint64_t c1,
                            std::uint64_t c2, PmSign sign, double tol) {
    double x1 = 4.0 * kPi * static_cast<double>(m) / static_cast<double>(q * c1);
    double x2 = 4.0 * kPi * static_cast<double>(m) / static_cast<double>(q * c2);
    return i_pm_integral(static_cast<double>(K), x1, x2, sign, tol);
}

// ---------------------------------------------------------------------------
// Transformed weight moment
// ---------------------------------------------------------------------------

MomentSide sigma_k_transformed(std::uint64_t K, std::uint64_t m,
                               const chars::DirichletCharacter& chi, const MomentOptions& opts) {
    if (K < 6) throw RangeExceeded("sigma_k_transformed: K must be >= 6");
    std::uint64_t q = chi.modulus();
    int delta = chi.parity();
    MomentSide side;
    side.heuristic_tail = std::exp(-static_cast<double>(K) / 2.0);

    std::uint64_t C = static_cast<std::uint64_t>(
        std::floor(opts.cutoff_mult * 200.0 * static_cast<double>(m) /
                   (static_cast<double>(K) * static_cast<double>(q))));

    // certified bound for the dropped c > C range (both factors), via the
    // first-term-dominated J bound; applies whenever the dropped arguments
    // sit below the domination threshold at every weight in the window.
    {
        double sign_ok = 4.0 * kPi * static_cast<double>(m) / (static_cast<double>(q) * (C + 1.0));
        double out_sum = 0.0;
        bool applicable = true;
        for (std::uint64_t k = K / 2; k <= 3 * K + 1 && applicable; ++k) {
            if (k % 2 != static_cast<std::uint64_t>(delta) || k < 3) continue;
            double w = smoothfn::u_eval((static_cast<double>(k) - 1.0) / static_cast<double>(K));
            if (w <= 0.0) continue;
            int order = static_cast<int>(k) - 1;
            if (!(sign_ok < 2.0 * std::sqrt(order + 1.0))) {
                applicable = false;
                break;
            }
            // B_out = sum_{c>C} (2 pi m/(qc))^{order} / order!
            double log_num = std::log(2.0 * kPi * static_cast<double>(m) / static_cast<double>(q)) -
                             bessel::log_factorial(order) / order;
            double b_out = power_tail(log_num, static_cast<double>(order), C);
            double b_in = 0.0;
            for (std::uint64_t c = 1; c <= C; ++c)
                b_in += j_cheap_bound(order, 4.0 * kPi * static_cast<double>(m) /
                                                 static_cast<double>(q * c));
            out_sum += w * (2.0 * b_in * b_out + b_out * b_out);
        }
        if (applicable)
            side.certified_error += 8.0 * kPi * kPi / static_cast<double>(K) * out_sum;
        else
            side.certified_error += std::numeric_limits<double>::infinity();
    }

    if (C < 1) return side; // empty sum

    // Kloosterman weights S_chi(m,m;qc)/(qc)
    std::vector<std::complex<double>> w(C + 1);
    std::vector<double> w_err(C + 1);
    for (std::uint64_t c = 1; c <= C; ++c) {
        auto S = kloosterman::factored(static_cast<std::int64_t>(m), static_cast<std::int64_t>(m),
                                       q * c, chi);
        w[c] = S.value / static_cast<double>(q * c);
        w_err[c] = S.error_estimate / static_cast<double>(q * c);
    }

    struct Pair {
        std::uint64_t c1, c2;
        double fac;
        double bound;
    };
    std::vector<Pair> pairs;
    for (std::uint64_t c1 = 1; c1 <= C; ++c1) {
        for (std::uint64_t c2 = c1; c2 <= C; ++c2) {
            double fac = (c1 == c2) ? 1.0 : 2.0;
            // identity-side bound: (8 pi^2/K) sum_k u |w1 w2| Jb Jb
            double ksum = 0.0;
            for (std::uint64_t k = K / 2; k <= 3 * K + 1; ++k) {
                if (k % 2 != static_cast<std::uint64_t>(delta) || k < 3) continue;
                double uw = smoothfn::u_eval((static_cast<double>(k) - 1.0) / static_cast<double>(K));
                if (uw <= 0.0) continue;
                int order = static_cast<int>(k) - 1;
                ksum += uw *
                        j_cheap_bound(order, 4.0 * kPi * static_cast<double>(m) / static_cast<double>(q * c1)) *
                        j_cheap_bound(order, 4.0 * kPi * static_cast<double>(m) / static_cast<double>(q * c2));
            }
            double bound = 8.0 * kPi * kPi / static_cast<double>(K) * fac * std::abs(w[c1]) *
                           std::abs(w[c2]) * ksum;
            pairs.push_back({c1, c2, fac, bound});
        }
    }
    // prune the provably negligible pairs, cheapest bounds first
    std::vector<std::size_t> order_idx(pairs.size());
    std::iota(order_idx.begin(), order_idx.end(), 0);
    std::sort(order_idx.begin(), order_idx.end(),
              [&](std::size_t a, std::size_t b) { return pairs[a].bound < pairs[b].bound; });
    std::vector<char> keep(pairs.size(), 1);
    double pruned = 0.0;
    for (std::size_t idx : order_idx) {
        if (pruned + pairs[idx].bound <= 0.5 * opts.tail_budget) {
            pruned += pairs[idx].bound;
            keep[idx] = 0;
        } else {
            break;
        }
    }
    side.certified_error += pruned;

    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (keep[i]) live.push_back(i);

    struct PairResult {
        std::complex<double> term;
        double err;
        std::int64_t c1, c2;
    };
    auto results = parallel::map_indexed<PairResult>(live.size(), opts.workers, [&](std::size_t li) {
        const Pair& p = pairs[live[li]];
        auto Im = osc_integral_pm(m, K, q, p.c1, p.c2, PmSign::Minus, opts.quad_tol);
        auto Ip = osc_integral_pm(m, K, q, p.c1, p.c2, PmSign::Plus, opts.quad_tol);
        double sgn = (delta == 0) ? 1.0 : -1.0;
        std::complex<double> ww = w[p.c1] * w[p.c2];
        std::complex<double> term = p.fac * ww * (Im.value - sgn * Ip.value);
        double err = p.fac * (std::abs(ww) * (Im.quad_error + Ip.quad_error + Im.trunc_error + Ip.trunc_error) +
                              (w_err[p.c1] * std::abs(w[p.c2]) + w_err[p.c2] * std::abs(w[p.c1])) *
                                  (std::abs(Im.value) + std::abs(Ip.value)));
        return PairResult{term, err, static_cast<std::int64_t>(p.c1), static_cast<std::int64_t>(p.c2)};
    });

    std::vector<std::complex<double>> terms(results.size());
    std::vector<double> errs(results.size());
    double sign_delta = (delta == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        terms[i] = results[i].term;
        errs[i] = results[i].err;
        side.terms.push_back({results[i].c1, results[i].c2,
                              sign_delta * 4.0 * kPi * kPi * results[i].term.real()});
    }
    std::complex<double> total = parallel::tree_sum(terms);
    side.value = sign_delta * 4.0 * kPi * kPi * total.real();
    side.certified_error += 4.0 * kPi * kPi * (parallel::tree_sum(errs) + std::abs(total.imag())) +
                            kEps * std::abs(side.value) * static_cast<double>(results.size() + 4);
    return side;
}

// ---------------------------------------------------------------------------
// N_chi and the a + abar quadratic
// ---------------------------------------------------------------------------

std::vector<std::uint64_t> quadratic_unit_solutions(std::int64_t x, std::uint64_t l) {
    if (l == 0 || l > 1000000) throw RangeExceeded("quadratic_unit_solutions: l must be in [1, 10^6]");
    if (l == 1) return {0};
    std::uint64_t xr = static_cast<std::uint64_t>(((x % static_cast<std::int64_t>(l)) +
                                                   static_cast<std::int64_t>(l)) %
                                                  static_cast<std::int64_t>(l));
    std::vector<std::pair<std::uint64_t, std::uint64_t>> crt_parts; // (residue, prime power)
    std::vector<std::vector<std::uint64_t>> root_sets;
    for (const auto& [p, e] : arith::factorize(l).factors) {
        std::uint64_t pe = 1;
        for (int i = 0; i < e; ++i) pe *= p;
        // roots of a^2 - x a + 1 mod p, lifted level by level (the derivative
        // 2a - x may vanish mod p, so each level rechecks all p lifts)
        std::vector<std::uint64_t> roots;
        for (std::uint64_t a = 0; a < p; ++a) {
            if ((arith::mul_mod(a, a, p) + p - arith::mul_mod(xr % p, a, p) % p + 1) % p == 0)
                roots.push_back(a);
        }
        std::uint64_t mod = p;
        while (mod < pe) {
            std::uint64_t next = mod * p;
            std::vector<std::uint64_t> lifted;
            for (std::uint64_t r : roots) {
                for (std::uint64_t j = 0; j < p; ++j) {
                    std::uint64_t cand = r + j * mod;
                    std::uint64_t val = (arith::mul_mod(cand, cand, next) + next -
                                         arith::mul_mod(xr % next, cand % next, next) + 1) %
                                        next;
                    if (val % next == 0) lifted.push_back(cand);
                }
            }
            roots.swap(lifted);
            mod = next;
        }
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        root_sets.push_back(std::move(roots));
        crt_parts.push_back({0, pe});
    }
    // combine by CRT
    std::vector<std::uint64_t> result{0};
    std::uint64_t mod = 1;
    for (std::size_t i = 0; i < root_sets.size(); ++i) {
        std::uint64_t pe = crt_parts[i].second;
        std::vector<std::uint64_t> next;
        for (std::uint64_t base : result) {
            for (std::uint64_t r : root_sets[i]) {
                auto [res, mm] = arith::crt_combine({{base, mod}, {r, pe}});
                (void)mm;
                next.push_back(res);
            }
        }
        result.swap(next);
        mod *= pe;
    }
    std::sort(result.begin(), result.end());
    return result;
}

std::uint64_t v_count(std::int64_t x, std::uint64_t l) {
    return quadratic_unit_solutions(x, l).size();
}

namespace {

std::uint64_t floor_mod(std::int64_t v, std::uint64_t m) {
    std::int64_t r = v % static_cast<std::int64_t>(m);
    if (r < 0) r += static_cast<std::int64_t>(m);
    return static_cast<std::uint64_t>(r);
}

void require_lifted_modulus(std::uint64_t l1, std::uint64_t l2, const chars::DirichletCharacter& chi) {
    if (l1 % chi.modulus() != 0 || l2 % chi.modulus() != 0)
        throw ModulusMismatch("N_chi: character modulus must divide both l1 and l2");
}

// per-modulus table T[x] = sum over units a with a + abar = x of chi(a)
std::vector<std::complex<double>> adag_spectrum(std::uint64_t l, const chars::DirichletCharacter& chi) {
    std::vector<std::complex<double>> table(l, {0.0, 0.0});
    if (l == 1) {
        table[0] = {1.0, 0.0};
        return table;
    }
    for (std::uint64_t a = 1; a < l; ++a) {
        if (std::gcd(a, l) != 1) continue;
        std::uint64_t abar = arith::mod_inverse(static_cast<std::int64_t>(a), l);
        table[(a + abar) % l] += chi.eval(static_cast<std::int64_t>(a));
    }
    return table;
}

} // namespace

NCountValue n_chi_brute(std::int64_t n, std::uint64_t l1, std::uint64_t l2,
                        const chars::DirichletCharacter& chi) {
    require_lifted_modulus(l1, l2, chi);
    NCountValue out;
    out.n = n;
    out.l1 = l1;
    out.l2 = l2;
    out.method = NCountValue::Method::Brute;
    std::uint64_t L = l1 * l2;
    std::uint64_t target = floor_mod(n, L);
    std::complex<double> acc{0.0, 0.0};
    for (std::uint64_t a1 = 0; a1 < l1; ++a1) {
        if (std::gcd(a1 == 0 && l1 == 1 ? 1 : a1, l1) != 1) continue;
        std::uint64_t a1bar = (l1 == 1) ? 0 : arith::mod_inverse(static_cast<std::int64_t>(a1), l1);
        std::uint64_t d1 = (a1 + a1bar) % l1;
        for (std::uint64_t a2 = 0; a2 < l2; ++a2) {
            if (std::gcd(a2 == 0 && l2 == 1 ? 1 : a2, l2) != 1) continue;
            std::uint64_t a2bar = (l2 == 1) ? 0 : arith::mod_inverse(static_cast<std::int64_t>(a2), l2);
            std::uint64_t d2 = (a2 + a2bar) % l2;
            if ((d1 * l2 + d2 * l1) % L == target)
                acc += chi.eval(static_cast<std::int64_t>(a1)) * chi.eval(static_cast<std::int64_t>(a2));
        }
    }
    out.value = acc;
    return out;
}

NCountValue n_chi_structured(std::int64_t n, std::uint64_t l1, std::uint64_t l2,
                             const chars::DirichletCharacter& chi) {
    require_lifted_modulus(l1, l2, chi);
    NCountValue out;
    out.n = n;
    out.l1 = l1;
    out.l2 = l2;
    out.method = NCountValue::Method::Structured;
    std::uint64_t g = std::gcd(l1, l2);
    if (floor_mod(n, g) != 0) {
        out.value = {0.0, 0.0};
        return out;
    }
    std::uint64_t l1p = l1 / g, l2p = l2 / g;
    std::uint64_t L = l1 * l2;
    std::int64_t np = static_cast<std::int64_t>(floor_mod(n, L)) / static_cast<std::int64_t>(g);
    // x0 l2' + y0 l1' = n' with (l1', l2') = 1
    std::uint64_t x0 = (l1p == 1) ? 0
                                  : arith::mul_mod(floor_mod(np, l1p),
                                                   arith::mod_inverse(static_cast<std::int64_t>(l2p % l1p), l1p), l1p);
    std::int64_t y0_num = np - static_cast<std::int64_t>(x0) * static_cast<std::int64_t>(l2p);
    // y0 = (n' - x0 l2') / l1'
    std::int64_t y0 = y0_num / static_cast<std::int64_t>(l1p);

    std::complex<double> acc{0.0, 0.0};
    for (std::uint64_t h = 0; h < g; ++h) {
        std::uint64_t xh = floor_mod(static_cast<std::int64_t>(x0) +
                                         static_cast<std::int64_t>(h) * static_cast<std::int64_t>(l1p),
                                     l1);
        std::uint64_t yh = floor_mod(y0 - static_cast<std::int64_t>(h) * static_cast<std::int64_t>(l2p), l2);
        std::complex<double> s1{0.0, 0.0}, s2{0.0, 0.0};
        for (std::uint64_t a : quadratic_unit_solutions(static_cast<std::int64_t>(xh), l1))
            s1 += chi.eval(static_cast<std::int64_t>(l1 == 1 ? 1 : a));
        for (std::uint64_t a : quadratic_unit_solutions(static_cast<std::int64_t>(yh), l2))
            s2 += chi.eval(static_cast<std::int64_t>(l2 == 1 ? 1 : a));
        acc += s1 * s2;
    }
    out.value = acc;
    return out;
}

// ---------------------------------------------------------------------------
// Index-side integrals
// ---------------------------------------------------------------------------

OscIntegral osc_integral_index(std::int64_t n, std::uint64_t l1, std::uint64_t l2, std::uint64_t M,
                               int k, double tol) {
    if (k < 3) throw WeightTooSmall("osc_integral_index: weight must be >= 3");
    double L = static_cast<double>(l1) * static_cast<double>(l2);
    double a = static_cast<double>(M) / 2.0, b = 3.0 * static_cast<double>(M);
    double rate = 2.0 / static_cast<double>(l1) + 2.0 / static_cast<double>(l2) +
                  std::abs(static_cast<double>(n)) / L + 1.0 / static_cast<double>(M);
    int init = std::max(2, static_cast<int>(std::ceil((b - a) * rate / 3.0)));
    auto integrand = [&](double t) {
        double j1 = bessel::jn_value(k - 1, 4.0 * kPi * t / static_cast<double>(l1));
        double j2 = bessel::jn_value(k - 1, 4.0 * kPi * t / static_cast<double>(l2));
        return smoothfn::u_eval(t / static_cast<double>(M)) * j1 * j2 *
               std::complex<double>(std::cos(kTwoPi * t * n / L), std::sin(kTwoPi * t * n / L));
    };
    auto r = quadrature::gl_adaptive(integrand, a, b, tol, init, std::max(1 << 14, init * 16));
    return {r.value.real(), r.error_estimate, 0.0};
}

// ---------------------------------------------------------------------------
// Transformed index moment
// ---------------------------------------------------------------------------

namespace {

struct MContext {
    std::uint64_t M, q, C;
    int k;
    double t0, h;
    int N; // nodes
    std::vector<double> uw;                          // u(t/M) * trapezoid weight
    std::vector<std::vector<double>> jrow;           // [c] -> J_{k-1}(4 pi t / (qc)) per node
    std::vector<std::vector<std::complex<double>>> spectrum; // [c] -> a-dagger table mod qc
    double xi_cap;
};

void build_context(MContext& ctx, std::uint64_t M, int k, const chars::DirichletCharacter& chi,
                   const MomentOptions& opts) {
    ctx.M = M;
    ctx.k = k;
    ctx.q = chi.modulus();
    ctx.C = static_cast<std::uint64_t>(std::floor(opts.cutoff_mult * 200.0 * static_cast<double>(M) /
                                                  (static_cast<double>(k) * static_cast<double>(ctx.q))));
    const auto& window = smoothfn::SmoothWindow::shared();
    ctx.xi_cap = std::min(20.0, window.truncation_point(1e-13) / static_cast<double>(M));
    double fmax = 4.0 / static_cast<double>(ctx.q);
    double freq = fmax + fmax + ctx.xi_cap + 1.0 / static_cast<double>(M);
    double range = 2.5 * static_cast<double>(M);
    ctx.N = 2 * std::max(64, static_cast<int>(std::ceil(range * freq * 4.0))); // 8 per cycle, even
    ctx.t0 = static_cast<double>(M) / 2.0;
    ctx.h = range / ctx.N;
    ctx.uw.resize(ctx.N + 1);
    for (int i = 0; i <= ctx.N; ++i) {
        double t = ctx.t0 + i * ctx.h;
        double w = (i == 0 || i == ctx.N) ? 0.5 * ctx.h : ctx.h;
        ctx.uw[i] = smoothfn::u_eval(t / static_cast<double>(M)) * w;
    }
    ctx.jrow.assign(ctx.C + 1, {});
    ctx.spectrum.assign(ctx.C + 1, {});
    // J rows and a-dagger spectra, in parallel over c
    auto rows = parallel::map_indexed<int>(ctx.C, opts.workers, [&](std::size_t i) {
        std::uint64_t c = i + 1;
        std::uint64_t l = ctx.q * c;
        auto& row = ctx.jrow[c];
        row.resize(ctx.N + 1);
        for (int j = 0; j <= ctx.N; ++j) {
            if (ctx.uw[j] == 0.0 && j != 0 && j != ctx.N) {
                row[j] = 0.0;
                continue;
            }
            row[j] = bessel::jn_value(k - 1, 4.0 * kPi * (ctx.t0 + j * ctx.h) / static_cast<double>(l));
        }
        ctx.spectrum[c] = adag_spectrum(l, chi);
        return 0;
    });
    (void)rows;
}

// structured N via the per-modulus spectra; returns complex (real in exact arithmetic)
std::complex<double> n_from_spectra(const MContext& ctx, std::uint64_t c1, std::uint64_t c2,
                                    std::int64_t n) {
    std::uint64_t l1 = ctx.q * c1, l2 = ctx.q * c2;
    std::uint64_t g = std::gcd(l1, l2);
    if (floor_mod(n, g) != 0) return {0.0, 0.0};
    std::uint64_t l1p = l1 / g, l2p = l2 / g;
    std::uint64_t L = l1 * l2;
    std::int64_t np = static_cast<std::int64_t>(floor_mod(n, L)) / static_cast<std::int64_t>(g);
    std::uint64_t x0 = (l1p == 1) ? 0
                                  : arith::mul_mod(floor_mod(np, l1p),
                                                   arith::mod_inverse(static_cast<std::int64_t>(l2p % l1p), l1p), l1p);
    std::int64_t y0 = (np - static_cast<std::int64_t>(x0) * static_cast<std::int64_t>(l2p)) /
                      static_cast<std::int64_t>(l1p);
    const auto& T1 = ctx.spectrum[c1];
    const auto& T2 = ctx.spectrum[c2];
    std::complex<double> acc{0.0, 0.0};
    for (std::uint64_t h = 0; h < g; ++h) {
        std::uint64_t xh = floor_mod(static_cast<std::int64_t>(x0 + h * l1p), l1);
        std::uint64_t yh = floor_mod(y0 - static_cast<std::int64_t>(h * l2p), l2);
        acc += T1[xh] * T2[yh];
    }
    return acc;
}

// shell integral on the shared grid with half-grid Richardson estimate
struct ShellDot {
    double re, im, err;
};

ShellDot shell_dot(const MContext& ctx, const std::vector<double>& j1, const std::vector<double>& j2,
                   double xi) {
    double re = 0, im = 0, re2 = 0, im2 = 0;
    double phase_step = kTwoPi * xi * ctx.h;
    std::complex<double> rot(std::cos(phase_step), std::sin(phase_step));
    std::complex<double> ph(1.0, 0.0);
    for (int i = 0; i <= ctx.N; ++i) {
        if ((i & 511) == 0) {
            double tphase = kTwoPi * xi * (ctx.t0 + i * ctx.h);
            ph = {std::cos(tphase), std::sin(tphase)};
        }
        double base = ctx.uw[i] * j1[i] * j2[i];
        double tre = base * ph.real(), tim = base * ph.imag();
        re += tre;
        im += tim;
        if ((i & 1) == 0) {
            re2 += 2.0 * tre;
            im2 += 2.0 * tim;
        }
        ph *= rot;
    }
    double err = std::hypot(re - re2, im - im2);
    return {re, im, err};
}

} // namespace

MomentSide sigma_m_transformed(std::uint64_t M, int k, const chars::DirichletCharacter& chi,
                               const MomentOptions& opts) {
    if (k < 3) throw WeightTooSmall("sigma_m_transformed: weight must be >= 3");
    if (chi.parity() != (k % 2))
        throw ParityMismatch("sigma_m_transformed: character parity does not match the weight");
    MomentSide side;
    side.heuristic_tail = std::exp(-static_cast<double>(k));
    std::uint64_t q = chi.modulus();
    double front = 4.0 * kPi * kPi / (static_cast<double>(M) * static_cast<double>(q) * static_cast<double>(q));
    double sign_k = (k % 2 == 0) ? 1.0 : -1.0;

    MContext ctx;
    build_context(ctx, M, k, chi, opts);
    std::uint64_t C = ctx.C;

    // certified bound for the dropped c > C tail (see the weight-side analogue)
    {
        double z_drop = 12.0 * kPi * static_cast<double>(M) / (static_cast<double>(q) * (C + 1.0));
        if (z_drop < 2.0 * std::sqrt(static_cast<double>(k))) {
            double out_sum = 0.0;
            for (std::uint64_t m = std::max<std::uint64_t>(1, M / 2); m <= 3 * M; ++m) {
                double w = smoothfn::u_eval(static_cast<double>(m) / static_cast<double>(M));
                if (w <= 0.0) continue;
                double log_num = std::log(2.0 * kPi * static_cast<double>(m) / static_cast<double>(q)) -
                                 bessel::log_factorial(k - 1) / (k - 1.0);
                double b_out = power_tail(log_num, k - 1.0, C);
                double b_in = 0.0;
                for (std::uint64_t c = 1; c <= C; ++c)
                    b_in += j_cheap_bound(k - 1, 4.0 * kPi * static_cast<double>(m) /
                                                     static_cast<double>(q * c));
                out_sum += w * (2.0 * b_in * b_out + b_out * b_out);
            }
            side.certified_error += 4.0 * kPi * kPi / static_cast<double>(M) * out_sum;
        } else {
            side.certified_error += std::numeric_limits<double>::infinity();
        }
    }

    if (C < 1) return side;

    struct Pair {
        std::uint64_t c1, c2;
        double fac;
        double bound;
    };
    std::vector<Pair> pairs;
    for (std::uint64_t c1 = 1; c1 <= C; ++c1) {
        for (std::uint64_t c2 = c1; c2 <= C; ++c2) {
            double fac = (c1 == c2) ? 1.0 : 2.0;
            std::uint64_t l1 = q * c1, l2 = q * c2;
            double msum = 0.0;
            for (std::uint64_t m = std::max<std::uint64_t>(1, M / 2); m <= 3 * M; ++m) {
                double w = smoothfn::u_eval(static_cast<double>(m) / static_cast<double>(M));
                if (w <= 0.0) continue;
                msum += w * j_cheap_bound(k - 1, 4.0 * kPi * static_cast<double>(m) / static_cast<double>(l1)) *
                        j_cheap_bound(k - 1, 4.0 * kPi * static_cast<double>(m) / static_cast<double>(l2));
            }
            double phi1 = static_cast<double>(arith::euler_phi(l1));
            double phi2 = static_cast<double>(arith::euler_phi(l2));
            double bound = front * fac / (static_cast<double>(c1) * static_cast<double>(c2)) * phi1 *
                           phi2 * msum;
            pairs.push_back({c1, c2, fac, bound});
        }
    }
    std::vector<std::size_t> order_idx(pairs.size());
    std::iota(order_idx.begin(), order_idx.end(), 0);
    std::sort(order_idx.begin(), order_idx.end(),
              [&](std::size_t a, std::size_t b) { return pairs[a].bound < pairs[b].bound; });
    std::vector<char> keep(pairs.size(), 1);
    double pruned = 0.0;
    for (std::size_t idx : order_idx) {
        if (pruned + pairs[idx].bound <= 0.25 * opts.tail_budget) {
            pruned += pairs[idx].bound;
            keep[idx] = 0;
        } else {
            break;
        }
    }
    side.certified_error += pruned;

    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (keep[i]) live.push_back(i);

    double eps_stop = opts.tail_budget / (3.0 * std::sqrt(static_cast<double>(live.size()) + 1.0));

    struct PairResult {
        double value;      // contribution to sigma^2 without the (-1)^k front sign
        double err;        // quadrature + skipped-N slack
        double tail_est;   // dual-sum stopping estimate
        double im_leak;
        std::int64_t c1, c2;
    };

    auto results = parallel::map_indexed<PairResult>(live.size(), opts.workers, [&](std::size_t li) {
        const Pair& p = pairs[live[li]];
        std::uint64_t l1 = q * p.c1, l2 = q * p.c2;
        std::uint64_t g = std::gcd(l1, l2);
        double L = static_cast<double>(l1) * static_cast<double>(l2);
        const auto& j1 = ctx.jrow[p.c1];
        const auto& j2 = ctx.jrow[p.c2];
        double weight = front * p.fac / (static_cast<double>(p.c1) * static_cast<double>(p.c2));
        double fband = 2.0 / static_cast<double>(l1) + 2.0 / static_cast<double>(l2);
        double xi_lo = fband + std::min(8.0, 24.0 / static_cast<double>(M));
        long j_cap = static_cast<long>(std::ceil((fband + ctx.xi_cap) * L / static_cast<double>(g)));

        double acc = 0.0, acc_im = 0.0, qerr = 0.0;
        double max_abs_n = 1.0;
        int calm = 0;
        double last_mon = 0.0;
        long j = 0;
        for (; j <= j_cap; ++j) {
            std::int64_t n = static_cast<std::int64_t>(j) * static_cast<std::int64_t>(g);
            std::complex<double> N = n_from_spectra(ctx, p.c1, p.c2, n);
            double xi = static_cast<double>(n) / L;
            bool monitor = (j % 8 == 0);
            double aN = std::abs(N);
            if (aN > max_abs_n) max_abs_n = aN;
            if (aN < 1e-11 && !monitor) continue;
            ShellDot dot = shell_dot(ctx, j1, j2, xi);
            double contrib;
            if (j == 0) {
                contrib = N.real() * dot.re;
                acc_im += std::abs(N.imag() * dot.re);
                qerr += aN * dot.err;
            } else {
                contrib = 2.0 * N.real() * dot.re;
                acc_im += 2.0 * std::abs(N.imag()) * std::hypot(dot.re, dot.im);
                qerr += 2.0 * aN * dot.err;
            }
            if (aN >= 1e-11) acc += contrib;
            // stopping rule: past the spectral band and persistently small
            if (xi > xi_lo) {
                double mon = weight * std::hypot(dot.re, dot.im) * 2.0 * std::max(max_abs_n, 1.0);
                if (monitor || aN >= 1e-11) {
                    last_mon = mon;
                    calm = (mon < eps_stop) ? calm + 1 : 0;
                }
                if (calm >= 6) break;
            }
        }
        double tail_est = 30.0 * last_mon + ((j > j_cap) ? 10.0 * last_mon : 0.0);
        return PairResult{weight * acc, weight * (qerr + acc_im), tail_est, weight * acc_im,
                          static_cast<std::int64_t>(p.c1), static_cast<std::int64_t>(p.c2)};
    });

    std::vector<double> vals(results.size()), errs(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        vals[i] = results[i].value;
        errs[i] = results[i].err + results[i].tail_est;
        side.terms.push_back({results[i].c1, results[i].c2, sign_k * results[i].value});
    }
    side.value = sign_k * parallel::tree_sum(vals);
    side.certified_error += parallel::tree_sum(errs) +
                            kEps * std::abs(side.value) * static_cast<double>(results.size() + 4);
    return side;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

MomentReport moment_k_report(std::uint64_t K, std::uint64_t m, const chars::DirichletCharacter& chi,
                             const MomentOptions& opts) {
    MomentReport rep;
    rep.range = K;
    rep.fixed = m;
    rep.q = chi.modulus();
    rep.chi_index = chi.index();
    auto d = sigma_k_direct(K, m, chi, opts);
    auto t = sigma_k_transformed(K, m, chi, opts);
    rep.direct_value = d.value;
    rep.transformed_value = t.value;
    rep.discrepancy = d.value - t.value;
    rep.certified_error = d.certified_error + t.certified_error;
    rep.heuristic_tail = t.heuristic_tail;
    rep.direct_terms = std::move(d.terms);
    rep.transformed_terms = std::move(t.terms);
    return rep;
}

MomentReport moment_m_report(std::uint64_t M, int k, const chars::DirichletCharacter& chi,
                             const MomentOptions& opts) {
    MomentReport rep;
    rep.range = M;
    rep.fixed = static_cast<std::uint64_t>(k);
    rep.q = chi.modulus();
    rep.chi_index = chi.index();
    auto d = sigma_m_direct(M, k, chi, opts);
    auto t = sigma_m_transformed(M, k, chi, opts);
    rep.direct_value = d.value;
    rep.transformed_value = t.value;
    rep.discrepancy = d.value - t.value;
    rep.certified_error = d.certified_error + t.certified_error;
    rep.heuristic_tail = t.heuristic_tail;
    rep.direct_terms = std::move(d.terms);
    rep.transformed_terms = std::move(t.terms);
    return rep;
}

// ---------------------------------------------------------------------------
// S1 / S2 / T_sigma
// ---------------------------------------------------------------------------

namespace {

// smallest-prime-factor sieve
std::vector<std::uint32_t> spf_sieve(std::uint64_t n) {
    std::vector<std::uint32_t> spf(n + 1, 0);
    for (std::uint64_t i = 2; i <= n; ++i) {
        if (spf[i] == 0) {
            for (std::uint64_t j = i; j <= n; j += i)
                if (spf[j] == 0) spf[j] = static_cast<std::uint32_t>(i);
        }
    }
    return spf;
}

// sqrt(f(base*c)) given the factorization of base and the sieve for c
double sqrt_f_product(const std::vector<arith::PrimePower>& base,
                      const std::vector<std::uint32_t>& spf, std::uint64_t c) {
    // merge exponents
    double sqrt_f = 1.0;
    std::size_t bi = 0;
    std::uint64_t rest = c;
    std::vector<std::pair<std::uint64_t, int>> merged;
    while (rest > 1) {
        std::uint64_t p = spf[rest];
        int e = 0;
        while (rest % p == 0) {
            rest /= p;
            ++e;
        }
        merged.push_back({p, e});
    }
    std::sort(merged.begin(), merged.end());
    std::size_t mi = 0;
    while (bi < base.size() || mi < merged.size()) {
        std::uint64_t p;
        int e = 0;
        if (bi < base.size() && (mi >= merged.size() || base[bi].prime < merged[mi].first)) {
            p = base[bi].prime;
            e = base[bi].exponent;
            ++bi;
        } else if (mi < merged.size() && (bi >= base.size() || merged[mi].first < base[bi].prime)) {
            p = merged[mi].first;
            e = merged[mi].second;
            ++mi;
        } else {
            p = base[bi].prime;
            e = base[bi].exponent + merged[mi].second;
            ++bi;
            ++mi;
        }
        int half = e / 2;
        sqrt_f *= std::pow(static_cast<double>(p), half);
    }
    return sqrt_f;
}

double kahan_sum(const std::vector<double>& v) {
    double s = 0, c = 0;
    for (double x : v) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

} // namespace

double t_sigma_sum(double X, std::uint64_t a, double sigma) {
    if (X < 1.0) return 0.0;
    if (X > 1e6) throw RangeExceeded("t_sigma_sum: X must be <= 10^6");
    std::uint64_t n = static_cast<std::uint64_t>(std::floor(X));
    auto spf = spf_sieve(n);
    auto base = arith::factorize(a).factors;
    std::vector<double> terms(n);
    for (std::uint64_t c = 1; c <= n; ++c)
        terms[c - 1] = sqrt_f_product(base, spf, c) / std::pow(static_cast<double>(c), sigma);
    return kahan_sum(terms);
}

double s1_sum(double X, std::uint64_t q) { return t_sigma_sum(X, q, 0.25); }

double s2_sum(double X, std::uint64_t q) {
    if (X < 1.0) return 0.0;
    if (X > 1e4) throw RangeExceeded("s2_sum: X must be <= 10^4");
    std::uint64_t n = static_cast<std::uint64_t>(std::floor(X));
    auto spf = spf_sieve(n);
    auto base = arith::factorize(q).factors;
    std::vector<double> w(n + 1, 0.0);
    for (std::uint64_t c = 1; c <= n; ++c)
        w[c] = sqrt_f_product(base, spf, c) / std::pow(static_cast<double>(c), 0.75);
    double s = 0, comp = 0;
    for (std::uint64_t c1 = 1; c1 <= n; ++c1) {
        for (std::uint64_t c2 = 1; c2 <= n; ++c2) {
            double x = std::sqrt(static_cast<double>(std::gcd(c1, c2))) * w[c1] * w[c2];
            double y = x - comp;
            double t = s + y;
            comp = (t - s) - y;
            s = t;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Scaling report
// ---------------------------------------------------------------------------

namespace {

ScalingReport fit_slopes(std::vector<ScalingRow> rows, double predicted) {
    ScalingReport rep;
    rep.rows = std::move(rows);
    rep.predicted_slope = predicted;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rep.rows) {
        if (!r.negligible && r.sigma2 > 5e-300)
            pts.push_back({std::log(static_cast<double>(r.param)), std::log(r.sigma2)});
    }
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double npts = static_cast<double>(pts.size());
        rep.slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
        rep.slope_defined = true;
        rep.consistent = rep.slope <= predicted + 0.5;
    }
    return rep;
}

} // namespace

ScalingReport scaling_report_k(const std::vector<std::uint64_t>& Ks, std::uint64_t m,
                               const chars::DirichletCharacter& chi, const MomentOptions& opts) {
    std::vector<ScalingRow> rows;
    std::uint64_t q = chi.modulus();
    double gq = arith::g_function(chi.conductor());
    for (std::uint64_t K : Ks) {
        ScalingRow row;
        row.param = K;
        row.sigma2 = sigma_k_direct(K, m, chi, opts).value;
        double eps = 0.1;
        row.envelope = std::pow(static_cast<double>(m), 1.0 + eps) *
                           static_cast<double>(std::gcd(m, q)) * gq * gq /
                           (std::pow(static_cast<double>(K), 3.0) * static_cast<double>(q * q)) +
                       std::pow(static_cast<double>(K), -1000.0);
        row.negligible = row.sigma2 <= 1e-20;
        rows.push_back(row);
    }
    return fit_slopes(std::move(rows), -3.0);
}

ScalingReport scaling_report_m(const std::vector<int>& ks, std::uint64_t M,
                               const chars::DirichletCharacter& chi, const MomentOptions& opts) {
    std::vector<ScalingRow> rows;
    std::uint64_t q = chi.modulus();
    double fq = static_cast<double>(arith::largest_square_divisor(q));
    for (int k : ks) {
        ScalingRow row;
        row.param = static_cast<std::uint64_t>(k);
        row.sigma2 = sigma_m_direct(M, k, chi, opts).value;
        double eps = 0.1;
        row.envelope = std::pow(static_cast<double>(M), 0.5 + eps) * std::sqrt(fq) /
                           (std::pow(static_cast<double>(k), 1.5) * static_cast<double>(q)) +
                       std::pow(static_cast<double>(M), 1.0 + eps) * fq /
                           (std::pow(static_cast<double>(k), 2.5) * static_cast<double>(q * q)) +
                       std::pow(static_cast<double>(k), -1000.0);
        row.negligible = row.sigma2 <= 1e-20;
        rows.push_back(row);
    }
    return fit_slopes(std::move(rows), -1.5);
}

// ---------------------------------------------------------------------------
// Parity-windowed Neumann check and the per-pair Poisson identity
// ---------------------------------------------------------------------------

double parity_weighted_bessel_residual(std::uint64_t K, double x1, double x2, int delta,
                                       double tol) {
    if (std::abs(x1) > 1000.0 || std::abs(x2) > 1000.0)
        throw RangeExceeded("parity_weighted_bessel_residual: |x| must be <= 10^3");
    if (K < 4) throw RangeExceeded("parity_weighted_bessel_residual: K must be >= 4");
    double lhs = 0.0;
    for (std::uint64_t n = (delta == 0) ? 0 : 1; n <= 3 * K + 1; n += 2) {
        double w = smoothfn::u_eval(static_cast<double>(n) / static_cast<double>(K));
        if (w == 0.0) continue;
        lhs += w * bessel::jn_value(static_cast<int>(n), std::abs(x1)) *
               bessel::jn_value(static_cast<int>(n), std::abs(x2)) *
               (((x1 < 0) != (x2 < 0)) && (n & 1) ? -1.0 : 1.0);
    }
    // a sign flip of one argument swaps the two integrals
    bool flipped = (x1 < 0) != (x2 < 0);
    auto I1 = i_pm_integral(static_cast<double>(K), std::abs(x1), std::abs(x2),
                            flipped ? PmSign::Plus : PmSign::Minus, tol);
    auto I2 = i_pm_integral(static_cast<double>(K), std::abs(x1), std::abs(x2),
                            flipped ? PmSign::Minus : PmSign::Plus, tol);
    double sgn = (delta % 2 == 0) ? 1.0 : -1.0;
    double rhs = 0.5 * static_cast<double>(K) * (I1.value + sgn * I2.value);
    return std::abs(lhs - rhs);
}

std::complex<double> poisson_pair_m_sum(std::uint64_t M, int k, const chars::DirichletCharacter& chi,
                                        std::uint64_t c1, std::uint64_t c2) {
    std::uint64_t q = chi.modulus();
    std::complex<double> acc{0.0, 0.0};
    for (std::uint64_t m = std::max<std::uint64_t>(1, M / 2); m <= 3 * M; ++m) {
        double w = smoothfn::u_eval(static_cast<double>(m) / static_cast<double>(M));
        if (w == 0.0) continue;
        auto S1 = kloosterman::factored(static_cast<std::int64_t>(m), static_cast<std::int64_t>(m),
                                        q * c1, chi);
        auto S2 = kloosterman::factored(static_cast<std::int64_t>(m), static_cast<std::int64_t>(m),
                                        q * c2, chi);
        double j1 = bessel::jn_value(k - 1, 4.0 * kPi * static_cast<double>(m) / static_cast<double>(q * c1));
        double j2 = bessel::jn_value(k - 1, 4.0 * kPi * static_cast<double>(m) / static_cast<double>(q * c2));
        acc += w * S1.value * S2.value * j1 * j2;
    }
    return acc;
}

std::complex<double> poisson_pair_dual_sum(std::uint64_t M, int k,
                                           const chars::DirichletCharacter& chi, std::uint64_t c1,
                                           std::uint64_t c2) {
    std::uint64_t q = chi.modulus();
    std::uint64_t l1 = q * c1, l2 = q * c2;
    std::uint64_t g = std::gcd(l1, l2);
    double L = static_cast<double>(l1) * static_cast<double>(l2);
    double fband = 2.0 / static_cast<double>(l1) + 2.0 / static_cast<double>(l2);
    const auto& window = smoothfn::SmoothWindow::shared();
    double xi_cap = fband + window.truncation_point(1e-14) / static_cast<double>(M);
    long j_cap = static_cast<long>(std::ceil(xi_cap * L / static_cast<double>(g)));

    std::complex<double> acc{0.0, 0.0};
    int calm = 0;
    for (long j = 0; j <= j_cap; ++j) {
        std::int64_t n = static_cast<std::int64_t>(j) * static_cast<std::int64_t>(g);
        auto N = n_chi_structured(n, l1, l2, chi);
        double xi = static_cast<double>(n) / L;
        if (std::abs(N.value) > 1e-12 || j % 4 == 0) {
            auto I = osc_integral_index(n, l1, l2, M, k, 1e-11);
            double contrib_mag;
            if (j == 0) {
                acc += N.value * I.value;
                contrib_mag = std::abs(N.value * I.value);
            } else {
                acc += 2.0 * N.value * I.value;
                contrib_mag = std::abs(2.0 * N.value * I.value);
            }
            if (xi > fband + 24.0 / static_cast<double>(M)) {
                double probe = std::abs(I.value) * std::max(1.0, std::abs(N.value));
                calm = (probe < 1e-11 && contrib_mag < 1e-11) ? calm + 1 : 0;
                if (calm >= 8) break;
            }
        }
    }
    return acc;
}

} // namespace poincare::moments
