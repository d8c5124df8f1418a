#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "poincare/characters.hpp"

namespace poincare::series {

// A truncated series value with a rigorous bound on the dropped tail and the
// accumulated floating-point slack of the evaluated terms.
struct TailBoundedValue {
    std::complex<double> value{0.0, 0.0};
    double tail_bound = 0.0;
    double float_error = 0.0;
    std::int64_t terms_used = 0;
};

enum class Verdict { NonZeroCertified, Inconclusive, ParityMismatch };
const char* to_string(Verdict v);

struct NormCertificate {
    int k = 0;
    std::uint64_t m = 0, q = 0, chi_index = 0;
    double norm_sq = 0.0;
    double total_error = 0.0;
    double margin = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

struct DeltaOptions {
    double rel_tol = 1e-9;
    // Forces summation past `cutoff_mult` times the first-term-domination
    // onset; used by the doubled-cutoff stability checks.
    double cutoff_mult = 1.0;
    std::uint64_t c_limit = 10000000;
};

// Delta_{k,q,chi}(m,n) = sum_{c>=1} S_chi(m,n;cq)/(cq) J_{k-1}(4 pi sqrt(mn)/(cq)),
// truncated once the certified tail (trivial Kloosterman bound times the
// first-term-dominated Bessel bound, summed by comparison with an integral)
// is below rel_tol * max(1,|value|).
TailBoundedValue delta_series(int k, std::uint64_t m, std::uint64_t n,
                              const chars::DirichletCharacter& chi, DeltaOptions opts = {});

// ||P~||^2 = 1 + 2 pi i^k Delta(m,m); i^k applied as an exact quarter-turn.
NormCertificate norm_squared(int k, std::uint64_t m, const chars::DirichletCharacter& chi,
                             DeltaOptions opts = {});

// Coefficient of x^n in x prod_{j<=n} (1-x^j)^24, exact integer arithmetic.
std::int64_t ramanujan_tau(int n);

struct ScanRow {
    std::uint64_t param = 0; // k or m
    NormCertificate cert;
    bool near_unit = false;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    std::uint64_t near_unit_count = 0;
    std::uint64_t certified_count = 0;
    std::vector<std::uint64_t> exceptional; // parameters failing the near-unit test
    double reference = 0.0;                 // K/2 resp. M, for comparison
    double threshold = 0.0;                 // K^-eps resp. k^-eps
};

// Weight scan over K < k < 2K, k of the character's parity.
ScanResult scan_k(std::uint64_t K, std::uint64_t m, const chars::DirichletCharacter& chi,
                  double eps, int workers = 1, DeltaOptions opts = {});

// Index scan over M < m < 2M at fixed weight k.
ScanResult scan_m(std::uint64_t M, int k, const chars::DirichletCharacter& chi, double eps,
                  int workers = 1, DeltaOptions opts = {});

} // namespace poincare::series
