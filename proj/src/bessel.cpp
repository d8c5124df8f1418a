#include "poincare/bessel.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "poincare/errors.hpp"

namespace poincare::bessel {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxOrder = 10000;
constexpr double kMaxArgument = 100000.0;
constexpr double kPi = 3.1415926535897932384626433832795;

} // namespace

double log_factorial(int n) {
    static const std::vector<double> table = [] {
        std::vector<double> t(120001);
        t[0] = 0.0;
        for (int i = 1; i < static_cast<int>(t.size()); ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
        return t;
    }();
    return table[n];
}

namespace {

// Taylor evaluation valid in the dominated regime z < 2 sqrt(nu+1):
// terms alternate with strictly decreasing magnitude, so there is no
// cancellation growth and the leading factor carries the scale.
BesselEval jn_taylor_dominated(int nu, double z) {
    BesselEval out{nu, z, 0.0, 0.0};
    double x = z * z / 4.0;
    double lead_log = nu * std::log(z / 2.0) - log_factorial(nu);
    double sum = 1.0, term = 1.0;
    int l = 0;
    while (true) {
        term *= -x / ((l + 1.0) * (nu + l + 1.0));
        sum += term;
        ++l;
        if (std::abs(term) < kEps * std::abs(sum) || l > 40000) break;
    }
    double value = std::exp(lead_log) * sum;
    out.value = value;
    out.abs_error_bound = std::abs(value) * kEps * (l + 4.0) + 1e-300;
    return out;
}

// One Miller pass: backward recurrence from `start`, normalized by
// J_0 + 2 sum_{k>=1} J_{2k} = 1.
double miller_pass(int nu, double z, int start) {
    double fp = 0.0;     // f_{n+1}
    double f = 1e-280;   // f_n
    double sum = 0.0;
    double target = 0.0;
    for (int n = start; n >= 1; --n) {
        double fm = (2.0 * n / z) * f - fp;
        fp = f;
        f = fm; // f = f_{n-1}
        if (n - 1 == nu) target = f;
        if (((n - 1) & 1) == 0) sum += (n - 1 == 0) ? f : 2.0 * f;
        if (std::abs(f) > 1e250) {
            f *= 1e-250;
            fp *= 1e-250;
            sum *= 1e-250;
            target *= 1e-250;
        }
    }
    return target / sum;
}

BesselEval jn_miller(int nu, double z) {
    BesselEval out{nu, z, 0.0, 0.0};
    int base = std::max(nu, static_cast<int>(std::ceil(z)));
    int margin = 24 + static_cast<int>(13.0 * std::cbrt(static_cast<double>(base)));
    double v1 = miller_pass(nu, z, base + margin);
    double v2 = miller_pass(nu, z, base + margin + margin / 2 + 8);
    int tries = 0;
    while (std::abs(v1 - v2) > 1e-13 * std::max(std::abs(v2), 1e-2) && tries < 4) {
        margin *= 2;
        v1 = miller_pass(nu, z, base + margin);
        v2 = miller_pass(nu, z, base + margin + margin / 2 + 8);
        ++tries;
    }
    out.value = v2;
    out.abs_error_bound = std::max(2.0 * std::abs(v1 - v2), 4.0 * kEps);
    return out;
}

} // namespace

BesselEval jn(int nu, double z) {
    if (nu < 0 || nu > kMaxOrder)
        throw RangeExceeded("jn: order must be in [0, 10^4]");
    if (!(z >= 0.0) || z > kMaxArgument)
        throw RangeExceeded("jn: argument must be in [0, 10^5]");
    if (z == 0.0) return {nu, z, nu == 0 ? 1.0 : 0.0, 0.0};
    if (z < 2.0 * std::sqrt(nu + 1.0) && z * z / (4.0 * (nu + 1.0)) < 0.9) return jn_taylor_dominated(nu, z);
    return jn_miller(nu, z);
}

double jn_value(int nu, double z) { return jn(nu, z).value; }

double jn_tail_dominated_bound(int nu, double z) {
    if (nu < 0) throw RangeExceeded("jn_tail_dominated_bound: negative order");
    if (!(z >= 0.0)) throw RangeExceeded("jn_tail_dominated_bound: negative argument");
    if (!(z < 2.0 * std::sqrt(nu + 1.0)))
        throw DominanceNotApplicable("first-term domination requires z < 2 sqrt(nu+1)");
    if (z == 0.0) return nu == 0 ? 1.0 : 0.0;
    return std::exp(nu * std::log(z / 2.0) - log_factorial(nu));
}

namespace {

// J_n at possibly negative argument: J_n(-z) = (-1)^n J_n(z).
double jn_signed(int n, double x) {
    double v = jn_value(n, std::abs(x));
    if (x < 0.0 && (n & 1)) v = -v;
    return v;
}

} // namespace

double neumann_residual(double x1, double x2, double theta, int N) {
    if (std::abs(x1) > 1000.0 || std::abs(x2) > 1000.0)
        throw RangeExceeded("neumann_residual: |x| must be <= 10^3");
    // J_{-n}(x1) J_{-n}(x2) e^{+in theta} pairs with +n, leaving a real cosine sum.
    double lhs = jn_signed(0, x1) * jn_signed(0, x2);
    for (int n = 1; n <= N; ++n)
        lhs += 2.0 * std::cos(n * theta) * jn_signed(n, x1) * jn_signed(n, x2);
    double arg = std::sqrt(std::max(0.0, x1 * x1 + x2 * x2 - 2.0 * x1 * x2 * std::cos(theta)));
    double rhs = jn_value(0, arg);
    return std::abs(lhs - rhs);
}

std::pair<double, double> j0_shift_partial(double A, double B, int N) {
    if (!(A > 0.0) || A + B < 0.0)
        throw RangeExceeded("j0_shift_partial: requires A > 0 and A + B >= 0");
    double ratio = B / std::sqrt(A);
    double partial = 0.0;
    double coeff = 1.0; // (-1)^n/n! (B/sqrt A)^n
    for (int n = 0; n < N; ++n) {
        if (n > 0) coeff *= -ratio / n;
        partial += coeff * jn_value(n, 2.0 * std::sqrt(A));
    }
    double err_term = std::pow(std::abs(ratio), N);
    return {partial, err_term};
}

double j0_shift_error_constant() {
    // Twice the maximum error/(|B|/sqrt A)^N ratio observed on the calibration
    // grid A in {0.25..64}, B/A in [-0.9, 0.9], N in {1..8} (see tests).
    return 2.31;
}

double j0_fast(double z) {
    z = std::abs(z);
    if (z <= 13.0) {
        double x = z * z / 4.0;
        double sum = 1.0, term = 1.0;
        int l = 0;
        do {
            ++l;
            term *= -x / (static_cast<double>(l) * l);
            sum += term;
        } while (std::abs(term) > 1e-19 * std::abs(sum) && l < 60);
        return sum;
    }
    // Hankel expansion: J_0 = sqrt(2/(pi z)) [P cos(z - pi/4) - Q sin(z - pi/4)]
    double P = 0.0, Q = 0.0;
    double T = 1.0; // T_m = (mu - 1^2)(mu - 3^2).../(m! (8z)^m), mu = 0
    double prev = std::numeric_limits<double>::max();
    for (int m = 0; m < 40; ++m) {
        if (std::abs(T) > prev) break; // asymptotic series: stop at smallest term
        prev = std::abs(T);
        if (m % 4 == 0) P += T;
        else if (m % 4 == 1) Q += T;
        else if (m % 4 == 2) P -= T;
        else Q -= T;
        double odd = 2.0 * m + 1.0;
        T *= -odd * odd / (8.0 * (m + 1.0) * z);
    }
    double chi = z - kPi / 4.0;
    return std::sqrt(2.0 / (kPi * z)) * (P * std::cos(chi) - Q * std::sin(chi));
}

double jn_integral_oracle(int nu, double z) {
    constexpr int kNodes = 2000;
    double h = kPi / kNodes;
    double sum = 0.5 * (std::cos(0.0) + std::cos(nu * kPi));
    for (int i = 1; i < kNodes; ++i) {
        double theta = i * h;
        sum += std::cos(nu * theta - z * std::sin(theta));
    }
    return sum * h / kPi;
}

} // namespace poincare::bessel
