#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

namespace poincare::chars {

// A root of unity e(num/den), with num/den kept as an exactly reduced
// rational so conjugation and equality checks are exact.
struct Phase {
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool operator==(const Phase&) const = default;
};

Phase phase_normalize(std::int64_t num, std::int64_t den);
Phase phase_add(Phase a, Phase b);
Phase phase_negate(Phase a);
std::complex<double> phase_value(Phase a);

class DirichletCharacter {
public:
    // All characters mod q, principal first; the order is fixed by the
    // generator convention (smallest primitive root per odd prime power,
    // {-1, 5} for 2^a with a >= 3) and is the CLI's q:index addressing.
    static std::vector<DirichletCharacter> enumerate(std::uint64_t q);
    static DirichletCharacter principal(std::uint64_t q);
    static DirichletCharacter from_index(std::uint64_t q, std::uint64_t index);

    std::uint64_t modulus() const { return q_; }
    std::uint64_t conductor() const { return conductor_; }
    int parity() const { return parity_; }
    std::uint64_t index() const { return index_; }
    bool is_principal() const { return index_ == 0; }
    bool is_real() const;

    std::complex<double> eval(std::int64_t a) const;
    // Exact phase of chi(a); returns false when gcd(a,q) > 1 (value 0).
    bool phase_at(std::int64_t a, Phase& out) const;

    DirichletCharacter conjugate() const;

    // Sum over a mod q of chi(a) e(a/q).
    std::complex<double> gauss_sum() const;

    bool operator==(const DirichletCharacter& other) const {
        return q_ == other.q_ && exponents_ == other.exponents_;
    }

private:
    struct UnitGroup;
    DirichletCharacter(std::shared_ptr<const UnitGroup> group, std::vector<std::uint64_t> exponents,
                       std::uint64_t index);
    void build_table();

    std::shared_ptr<const UnitGroup> group_;
    std::uint64_t q_ = 1;
    std::vector<std::uint64_t> exponents_; // one per cyclic factor of (Z/q)*
    std::uint64_t index_ = 0;
    std::uint64_t conductor_ = 1;
    int parity_ = 0;
    // per residue r in [0,q): phase of chi(r), valid where unit_[r]
    std::vector<Phase> table_;
    std::vector<bool> unit_;
};

} // namespace poincare::chars
