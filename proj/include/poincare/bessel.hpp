#pragma once

#include <utility>

namespace poincare::bessel {

struct BesselEval {
    int order = 0;
    double argument = 0.0;
    double value = 0.0;
    double abs_error_bound = 0.0;
};

// J_nu(z) for integer 0 <= nu <= 10^4 and 0 <= z <= 10^5.
// Taylor series in the term-dominated regime z < 2 sqrt(nu+1) (leading factor
// in log space, so deeply evanescent values keep relative accuracy), Miller
// backward recurrence normalized by J_0 + 2 sum J_{2k} = 1 otherwise.
BesselEval jn(int nu, double z);
double jn_value(int nu, double z);

// ln(n!) with cached table.
double log_factorial(int n);

// (z/2)^nu / nu!, a proven upper bound for |J_nu(z)| when z < 2 sqrt(nu+1)
// (the Taylor terms then decrease in magnitude). Evaluated in log space.
double jn_tail_dominated_bound(int nu, double z);

// | sum_{|n|<=N} J_n(x1) J_n(x2) e^{-in theta}  -  J_0(sqrt(x1^2+x2^2-2 x1 x2 cos theta)) |
double neumann_residual(double x1, double x2, double theta, int N);

// Partial sum of J_0(2 sqrt(A+B)) = sum_n ((-1)^n/n!) (B/sqrt(A))^n J_n(2 sqrt(A));
// returns {partial, (|B|/sqrt(A))^N}.
std::pair<double, double> j0_shift_partial(double A, double B, int N);

// Frozen constant C with |J_0(2 sqrt(A+B)) - partial| <= C (|B|/sqrt(A))^N,
// calibrated once over a 1000-point (A,B,N) grid (see tests/calibration).
double j0_shift_error_constant();

// J_0 with absolute error ~5e-11, cheap enough for oscillatory-quadrature
// inner loops. Taylor for z <= 13, Hankel asymptotic expansion beyond.
double j0_fast(double z);

// Integral representation (1/pi) int_0^pi cos(nu theta - z sin theta) dtheta
// via 2000-node trapezoid; retained as an independent test oracle.
double jn_integral_oracle(int nu, double z);

} // namespace poincare::bessel
