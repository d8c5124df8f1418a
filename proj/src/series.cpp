#include "poincare/series.hpp"

#include <cmath>
#include <limits>

#include "poincare/bessel.hpp"
#include "poincare/errors.hpp"
#include "poincare/kloosterman.hpp"
#include "poincare/parallel.hpp"

namespace poincare::series {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// sum_{c >= C} (2 pi sqrt(mn)/(cq))^{k-1}/(k-1)!  <=  first term + integral
// comparison, computed in log space.
double tail_from(int k, double log_base, std::uint64_t C) {
    double lc = std::log(static_cast<double>(C));
    double l1 = log_base - (k - 1.0) * lc;
    double l2 = log_base - (k - 2.0) * lc - std::log(k - 2.0);
    double t1 = l1 > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(l1);
    double t2 = l2 > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(l2);
    return t1 + t2;
}

} // namespace

TailBoundedValue delta_series(int k, std::uint64_t m, std::uint64_t n,
                              const chars::DirichletCharacter& chi, DeltaOptions opts) {
    if (k < 3) throw WeightTooSmall("delta_series: weight must be >= 3");
    if (m == 0 || n == 0) throw RangeExceeded("delta_series: indices must be positive");
    std::uint64_t q = chi.modulus();
    double sqrt_mn = std::sqrt(static_cast<double>(m)) * std::sqrt(static_cast<double>(n));

    // first-term domination applies once 4 pi sqrt(mn)/(cq) < 2 sqrt(k)
    double onset = 2.0 * kPi * sqrt_mn / (static_cast<double>(q) * std::sqrt(static_cast<double>(k)));
    std::uint64_t c0 = static_cast<std::uint64_t>(std::ceil(onset)) + 1;
    std::uint64_t c_stop_min = static_cast<std::uint64_t>(std::ceil(static_cast<double>(c0) * opts.cutoff_mult));
    if (c0 > opts.c_limit)
        throw ToleranceUnreachable("delta_series: domination onset beyond the c limit");

    // log of (2 pi sqrt(mn)/q)^{k-1}/(k-1)!
    double log_base = (k - 1.0) * std::log(2.0 * kPi * sqrt_mn / static_cast<double>(q)) -
                      bessel::log_factorial(k - 1);

    TailBoundedValue out;
    double re = 0, im = 0, cre = 0, cim = 0; // compensated
    double float_err = 0.0;
    std::uint64_t c = 1;
    for (;; ++c) {
        if (c > opts.c_limit)
            throw ToleranceUnreachable("delta_series: tolerance not reached by the c limit");
        std::uint64_t cq = c * q;
        auto S = kloosterman::factored(static_cast<std::int64_t>(m), static_cast<std::int64_t>(n), cq, chi);
        double z = 4.0 * kPi * sqrt_mn / static_cast<double>(cq);
        auto J = bessel::jn(k - 1, z);
        std::complex<double> term = S.value * (J.value / static_cast<double>(cq));
        double y = term.real() - cre, t = re + y;
        cre = (t - re) - y;
        re = t;
        y = term.imag() - cim;
        t = im + y;
        cim = (t - im) - y;
        im = t;
        float_err += (S.error_estimate * std::abs(J.value) + std::abs(S.value) * J.abs_error_bound) /
                         static_cast<double>(cq) +
                     kEps * std::abs(term);
        if (c >= c0 && c >= c_stop_min) {
            double tail = tail_from(k, log_base, c + 1);
            double mag = std::hypot(re, im);
            if (tail <= opts.rel_tol * std::max(1.0, mag)) {
                out.tail_bound = tail;
                break;
            }
        }
    }
    out.value = {re, im};
    out.float_error = float_err;
    out.terms_used = static_cast<std::int64_t>(c);
    return out;
}

namespace {

std::complex<double> quarter_turn(std::complex<double> z, int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return z;
        case 1: return {-z.imag(), z.real()};
        case 2: return -z;
        default: return {z.imag(), -z.real()};
    }
}

} // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::NonZeroCertified: return "NonZeroCertified";
        case Verdict::Inconclusive: return "Inconclusive";
        default: return "ParityMismatch";
    }
}

NormCertificate norm_squared(int k, std::uint64_t m, const chars::DirichletCharacter& chi,
                             DeltaOptions opts) {
    NormCertificate cert;
    cert.k = k;
    cert.m = m;
    cert.q = chi.modulus();
    cert.chi_index = chi.index();
    if (chi.parity() != (k % 2)) {
        cert.verdict = Verdict::ParityMismatch;
        cert.norm_sq = std::numeric_limits<double>::quiet_NaN();
        cert.margin = std::numeric_limits<double>::quiet_NaN();
        cert.total_error = std::numeric_limits<double>::quiet_NaN();
        return cert;
    }
    auto delta = delta_series(k, m, m, chi, opts);
    std::complex<double> rotated = quarter_turn(delta.value, k);
    cert.norm_sq = 1.0 + 2.0 * kPi * rotated.real();
    // the imaginary leak is numerical noise; fold it into the error budget
    cert.total_error =
        2.0 * kPi * (delta.tail_bound + delta.float_error + std::abs(rotated.imag())) + 1e-12;
    cert.margin = cert.norm_sq - cert.total_error;
    cert.verdict = cert.margin > 0.0 ? Verdict::NonZeroCertified : Verdict::Inconclusive;
    return cert;
}

std::int64_t ramanujan_tau(int n) {
    if (n < 1 || n > 200) throw RangeExceeded("ramanujan_tau: n must be in [1, 200]");
    // x prod (1-x^j)^24: need the coefficient of x^{n-1} in prod_{j<=n}(1-x^j)^24
    int len = n;
    std::vector<__int128> eta(len, 0);
    eta[0] = 1;
    for (int j = 1; j < len; ++j) {
        for (int i = len - 1; i >= j; --i) eta[i] -= eta[i - j];
    }
    std::vector<__int128> pow(len, 0), tmp(len, 0);
    pow[0] = 1;
    for (int e = 0; e < 24; ++e) {
        std::fill(tmp.begin(), tmp.end(), static_cast<__int128>(0));
        for (int i = 0; i < len; ++i) {
            if (pow[i] == 0) continue;
            for (int j = 0; j + i < len; ++j) tmp[i + j] += pow[i] * eta[j];
        }
        pow.swap(tmp);
    }
    __int128 tau = pow[n - 1];
    return static_cast<std::int64_t>(tau);
}

ScanResult scan_k(std::uint64_t K, std::uint64_t m, const chars::DirichletCharacter& chi,
                  double eps, int workers, DeltaOptions opts) {
    if (K < 6) throw RangeExceeded("scan_k: K must be >= 6");
    int delta = chi.parity();
    std::vector<std::uint64_t> ks;
    for (std::uint64_t k = K + 1; k < 2 * K; ++k)
        if (k % 2 == static_cast<std::uint64_t>(delta)) ks.push_back(k);
    double threshold = std::pow(static_cast<double>(K), -eps);

    ScanResult result;
    result.threshold = threshold;
    result.reference = static_cast<double>(K) / 2.0;
    auto rows = parallel::map_indexed<ScanRow>(ks.size(), workers, [&](std::size_t i) {
        ScanRow row;
        row.param = ks[i];
        row.cert = norm_squared(static_cast<int>(ks[i]), m, chi, opts);
        return row;
    });
    result.rows = std::move(rows);
    for (auto& row : result.rows) {
        if (row.cert.verdict != Verdict::ParityMismatch &&
            std::abs(row.cert.norm_sq - 1.0) <= threshold)
            row.near_unit = true;
        if (row.near_unit) ++result.near_unit_count;
        else result.exceptional.push_back(row.param);
        if (row.cert.verdict == Verdict::NonZeroCertified) ++result.certified_count;
    }
    return result;
}

ScanResult scan_m(std::uint64_t M, int k, const chars::DirichletCharacter& chi, double eps,
                  int workers, DeltaOptions opts) {
    if (k < 3) throw WeightTooSmall("scan_m: weight must be >= 3");
    std::vector<std::uint64_t> ms;
    for (std::uint64_t m = M + 1; m < 2 * M; ++m) ms.push_back(m);
    double threshold = std::pow(static_cast<double>(k), -eps);

    ScanResult result;
    result.threshold = threshold;
    result.reference = static_cast<double>(M);
    auto rows = parallel::map_indexed<ScanRow>(ms.size(), workers, [&](std::size_t i) {
        ScanRow row;
        row.param = ms[i];
        row.cert = norm_squared(k, ms[i], chi, opts);
        return row;
    });
    result.rows = std::move(rows);
    for (auto& row : result.rows) {
        if (row.cert.verdict != Verdict::ParityMismatch &&
            std::abs(row.cert.norm_sq - 1.0) <= threshold)
            row.near_unit = true;
        if (row.near_unit) ++result.near_unit_count;
        else result.exceptional.push_back(row.param);
        if (row.cert.verdict == Verdict::NonZeroCertified) ++result.certified_count;
    }
    return result;
}

} // namespace poincare::series
