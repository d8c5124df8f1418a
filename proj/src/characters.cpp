#include "poincare/characters.hpp"

#include <cmath>
#include <numeric>

#include "poincare/arith.hpp"
#include "poincare/errors.hpp"

namespace poincare::chars {

namespace {
constexpr std::uint64_t kModulusGuard = 1000000;
constexpr double kTwoPi = 6.283185307179586476925286766559;
} // namespace

Phase phase_normalize(std::int64_t num, std::int64_t den) {
    if (den < 0) {
        den = -den;
        num = -num;
    }
    num %= den;
    if (num < 0) num += den;
    std::int64_t g = std::gcd(num, den);
    return {num / g, den / g};
}

Phase phase_add(Phase a, Phase b) {
    std::int64_t g = std::gcd(a.den, b.den);
    std::int64_t den = a.den / g * b.den;
    std::int64_t num = a.num * (b.den / g) + b.num * (a.den / g);
    return phase_normalize(num, den);
}

Phase phase_negate(Phase a) { return phase_normalize(-a.num, a.den); }

std::complex<double> phase_value(Phase a) {
    switch (4 * a.num % a.den == 0 ? 4 * a.num / a.den : -1) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        case 3: return {0.0, -1.0};
        default: break;
    }
    // Map to (-1/2, 1/2] so conjugate phases produce exactly conjugate values.
    std::int64_t num = a.num;
    if (2 * num > a.den) num -= a.den;
    double t = kTwoPi * (static_cast<double>(num) / static_cast<double>(a.den));
    return {std::cos(t), std::sin(t)};
}

// ---------------------------------------------------------------------------
// Unit group structure (Z/q)* as a product of cyclic factors with explicit
// discrete-log tables per prime power.
// ---------------------------------------------------------------------------

struct DirichletCharacter::UnitGroup {
    std::uint64_t q = 1;
    struct Component {
        std::uint64_t pk;                  // p^a
        std::vector<std::uint64_t> orders; // cyclic factor orders within this component
        // dlog[f][r]: exponent of residue r (mod pk) along factor f; only for units
        std::vector<std::vector<std::uint32_t>> dlog;
    };
    std::vector<Component> components;
    std::vector<std::uint64_t> orders; // flattened cyclic factor orders
    std::uint64_t phi = 1;
    std::vector<std::uint64_t> divisors; // divisors of q, ascending
};

namespace {

std::uint64_t smallest_primitive_root(std::uint64_t p, std::uint64_t pk, std::uint64_t phi) {
    auto fac = poincare::arith::factorize(phi);
    for (std::uint64_t g = 2;; ++g) {
        if (g % p == 0) continue;
        bool ok = true;
        for (const auto& [pr, e] : fac.factors) {
            if (poincare::arith::pow_mod(g, phi / pr, pk) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
}

} // namespace

DirichletCharacter::DirichletCharacter(std::shared_ptr<const UnitGroup> group,
                                       std::vector<std::uint64_t> exponents, std::uint64_t index)
    : group_(std::move(group)), q_(group_->q), exponents_(std::move(exponents)), index_(index) {
    build_table();
}

namespace {

std::shared_ptr<const DirichletCharacter::UnitGroup> build_group(std::uint64_t q) {
    if (q == 0 || q > kModulusGuard)
        throw RangeExceeded("character modulus must be in [1, 10^6]");
    auto group = std::make_shared<DirichletCharacter::UnitGroup>();
    group->q = q;
    group->phi = poincare::arith::euler_phi(q);

    for (const auto& [p, a] : poincare::arith::factorize(q).factors) {
        DirichletCharacter::UnitGroup::Component comp;
        std::uint64_t pk = 1;
        for (int i = 0; i < a; ++i) pk *= p;
        comp.pk = pk;
        if (p == 2) {
            if (a == 1) {
                // trivial group
            } else if (a == 2) {
                comp.orders = {2};
                comp.dlog.assign(1, std::vector<std::uint32_t>(pk, 0));
                comp.dlog[0][3] = 1;
            } else {
                std::uint64_t half = pk / 4; // order of 5 mod 2^a
                comp.orders = {2, half};
                comp.dlog.assign(2, std::vector<std::uint32_t>(pk, 0));
                std::uint64_t r = 1;
                for (std::uint64_t t = 0; t < half; ++t) {
                    comp.dlog[0][r] = 0;
                    comp.dlog[1][r] = static_cast<std::uint32_t>(t);
                    std::uint64_t neg = pk - r;
                    comp.dlog[0][neg] = 1;
                    comp.dlog[1][neg] = static_cast<std::uint32_t>(t);
                    r = r * 5 % pk;
                }
            }
        } else {
            std::uint64_t phi = pk / p * (p - 1);
            std::uint64_t g = smallest_primitive_root(p, pk, phi);
            comp.orders = {phi};
            comp.dlog.assign(1, std::vector<std::uint32_t>(pk, 0));
            std::uint64_t r = 1;
            for (std::uint64_t t = 0; t < phi; ++t) {
                comp.dlog[0][r] = static_cast<std::uint32_t>(t);
                r = r * g % pk;
            }
        }
        group->components.push_back(std::move(comp));
    }
    for (const auto& c : group->components)
        for (std::uint64_t o : c.orders) group->orders.push_back(o);

    for (std::uint64_t d = 1; d * d <= q; ++d) {
        if (q % d == 0) {
            group->divisors.push_back(d);
            if (d != q / d) group->divisors.push_back(q / d);
        }
    }
    std::sort(group->divisors.begin(), group->divisors.end());
    return group;
}

} // namespace

void DirichletCharacter::build_table() {
    const auto& g = *group_;
    table_.assign(q_, Phase{});
    unit_.assign(q_, false);
    for (std::uint64_t r = 0; r < q_; ++r) {
        std::uint64_t rr = (q_ == 1) ? 1 : r;
        if (std::gcd(rr, q_) != 1) continue;
        unit_[r] = true;
        Phase ph{};
        std::size_t fi = 0;
        for (const auto& comp : g.components) {
            std::uint64_t rc = rr % comp.pk;
            for (std::size_t f = 0; f < comp.orders.size(); ++f, ++fi) {
                std::uint64_t t = comp.dlog[f][rc];
                std::uint64_t e = exponents_[fi];
                if (e && t)
                    ph = phase_add(ph, phase_normalize(static_cast<std::int64_t>(e % comp.orders[f] * t % comp.orders[f]),
                                                       static_cast<std::int64_t>(comp.orders[f])));
            }
        }
        table_[r] = ph;
    }

    // parity: chi(-1) is +-1
    Phase at_minus1 = (q_ <= 2) ? Phase{} : table_[q_ - 1];
    parity_ = (at_minus1.num != 0) ? 1 : 0;

    // conductor: least d | q with chi trivial on {a = 1 mod d, (a,q)=1}
    conductor_ = q_;
    for (std::uint64_t d : group_->divisors) {
        bool factors_through = true;
        for (std::uint64_t a = 1 + d; a < q_ && factors_through; a += d) {
            if (std::gcd(a, q_) != 1) continue;
            if (!(table_[a] == Phase{})) factors_through = false;
        }
        if (factors_through) {
            conductor_ = d;
            break;
        }
    }
}

std::vector<DirichletCharacter> DirichletCharacter::enumerate(std::uint64_t q) {
    auto group = build_group(q);
    std::vector<DirichletCharacter> out;
    std::uint64_t total = 1;
    for (std::uint64_t o : group->orders) total *= o;
    std::vector<std::uint64_t> exps(group->orders.size(), 0);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        out.push_back(DirichletCharacter(group, exps, idx));
        // mixed-radix increment, last factor fastest
        for (std::size_t i = exps.size(); i-- > 0;) {
            if (++exps[i] < group->orders[i]) break;
            exps[i] = 0;
        }
    }
    return out;
}

DirichletCharacter DirichletCharacter::principal(std::uint64_t q) {
    auto group = build_group(q);
    return DirichletCharacter(group, std::vector<std::uint64_t>(group->orders.size(), 0), 0);
}

DirichletCharacter DirichletCharacter::from_index(std::uint64_t q, std::uint64_t index) {
    auto group = build_group(q);
    std::uint64_t total = 1;
    for (std::uint64_t o : group->orders) total *= o;
    if (index >= total)
        throw RangeExceeded("character index " + std::to_string(index) + " out of range for q=" +
                            std::to_string(q) + " (phi=" + std::to_string(total) + ")");
    std::vector<std::uint64_t> exps(group->orders.size(), 0);
    std::uint64_t rem = index;
    for (std::size_t i = exps.size(); i-- > 0;) {
        exps[i] = rem % group->orders[i];
        rem /= group->orders[i];
    }
    return DirichletCharacter(group, std::move(exps), index);
}

bool DirichletCharacter::is_real() const {
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        std::uint64_t e = exponents_[i];
        if (e != 0 && 2 * e != group_->orders[i] && 2 * e % group_->orders[i] != 0) return false;
    }
    return true;
}

bool DirichletCharacter::phase_at(std::int64_t a, Phase& out) const {
    std::int64_t r = a % static_cast<std::int64_t>(q_);
    if (r < 0) r += static_cast<std::int64_t>(q_);
    if (!unit_[static_cast<std::uint64_t>(r)]) return false;
    out = table_[static_cast<std::uint64_t>(r)];
    return true;
}

std::complex<double> DirichletCharacter::eval(std::int64_t a) const {
    Phase ph;
    if (!phase_at(a, ph)) return {0.0, 0.0};
    return phase_value(ph);
}

DirichletCharacter DirichletCharacter::conjugate() const {
    std::vector<std::uint64_t> exps(exponents_.size());
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < exps.size(); ++i) {
        exps[i] = exponents_[i] == 0 ? 0 : group_->orders[i] - exponents_[i];
        index = index * group_->orders[i] + exps[i];
    }
    return DirichletCharacter(group_, std::move(exps), index);
}

std::complex<double> DirichletCharacter::gauss_sum() const {
    // compensated accumulation of exact phases chi(a) e(a/q)
    double re = 0, im = 0, cre = 0, cim = 0;
    for (std::uint64_t a = 0; a < q_; ++a) {
        Phase ph;
        if (!phase_at(static_cast<std::int64_t>(a), ph)) continue;
        Phase tot = phase_add(ph, phase_normalize(static_cast<std::int64_t>(a), static_cast<std::int64_t>(q_)));
        auto v = phase_value(tot);
        double y = v.real() - cre;
        double t = re + y;
        cre = (t - re) - y;
        re = t;
        y = v.imag() - cim;
        t = im + y;
        cim = (t - im) - y;
        im = t;
    }
    if (q_ == 1) return {1.0, 0.0};
    return {re, im};
}

} // namespace poincare::chars
