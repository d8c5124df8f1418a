#pragma once

#include <complex>

namespace poincare::smoothfn {

// psi(t) = E(t)/(E(t)+E(1-t)) with E(t) = exp(-1/t) for t > 0, else 0.
// Monotone C-infinity ramp from 0 at t<=0 to 1 at t>=1, psi(1/2) = 1/2.
double ramp(double t);

// The fixed test window: supp(u) in [1/2,3], u = 1 on [1,2], 0 <= u <= 1,
// mollifier ramps on [1/2,1] and [2,3].
double u_eval(double x);

// Fourier data of u. u_hat(t) = int u(x) e(-x t) dx.
//
// Two evaluation paths: `u_hat` integrates directly by adaptive
// Gauss-Legendre (the contract path, |t| <= 10^4); `u_hat_cached` serves the
// oscillatory-integral inner loops from an interpolation grid. The grid
// stores the two ramp transforms with their carrier phases stripped (the
// plateau part has a closed form), is built lazily in chunks, and is
// validated against the direct path in the tests.
class SmoothWindow {
public:
    static const SmoothWindow& shared();

    std::complex<double> u_hat(double t) const;
    std::complex<double> u_hat_cached(double s) const;
    std::complex<double> u_hat_moment(int j, double T) const;

    // Smallest grid point s0 with |u_hat| <= eps everywhere beyond it
    // (scanned over two consecutive clean blocks of the cached grid).
    double truncation_point(double eps) const;
    // Upper estimate of int_{|s| >= s0} |u_hat(s)| ds.
    double tail_mass(double s0) const;

    double grid_cap() const;

    SmoothWindow(const SmoothWindow&) = delete;
    SmoothWindow& operator=(const SmoothWindow&) = delete;

    struct Impl;

private:
    SmoothWindow();
    ~SmoothWindow();
    Impl* impl_;
};

} // namespace poincare::smoothfn
