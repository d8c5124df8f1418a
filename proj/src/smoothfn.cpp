#include "poincare/smoothfn.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "poincare/errors.hpp"
#include "poincare/quadrature.hpp"

namespace poincare::smoothfn {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
} // namespace

double ramp(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double e = 1.0 / t - 1.0 / (1.0 - t);
    if (e > 700.0) return 0.0;
    if (e < -700.0) return 1.0;
    return 1.0 / (1.0 + std::exp(e));
}

double u_eval(double x) {
    if (x <= 0.5 || x >= 3.0) return 0.0;
    if (x < 1.0) return ramp(2.0 * x - 1.0);
    if (x <= 2.0) return 1.0;
    return ramp(3.0 - x);
}

// ---------------------------------------------------------------------------
// Cached transform grid.
//
// u_hat(s) = P(s) + e(-0.75 s) G1(s) + e(-2.5 s) G2(s), where P is the
// plateau transform (closed form), and G1/G2 are the ramp transforms with
// the carrier of the ramp midpoint stripped, so they oscillate slowly enough
// for 8-point Lagrange interpolation on uniform grids.
// ---------------------------------------------------------------------------

struct SmoothWindow::Impl {
    // ramp descriptors
    struct RampGrid {
        double x_lo, x_hi, center;
        double h;                 // grid spacing in s
        std::vector<std::complex<double>> values;
        std::vector<double> inner_x, inner_w; // fixed GL decomposition of [x_lo, x_hi]
        std::atomic<std::size_t> built{0};    // number of valid leading entries
    };
    RampGrid g1, g2;
    double s_cap = 1408.0;
    double chunk = 64.0;
    mutable std::mutex build_mutex;
    mutable std::mutex cache_mutex;
    mutable std::map<double, double> trunc_cache;
};

namespace {

using Impl = SmoothWindow::Impl;

void init_ramp(Impl::RampGrid& g, double x_lo, double x_hi, double h, double s_cap) {
    g.x_lo = x_lo;
    g.x_hi = x_hi;
    g.center = 0.5 * (x_lo + x_hi);
    g.h = h;
    std::size_t n = static_cast<std::size_t>(std::ceil(s_cap / h)) + 16;
    g.values.assign(n, {0.0, 0.0});
    // fixed Gauss-Legendre decomposition fine enough for the largest s
    double cycles = (x_hi - x_lo) * s_cap;
    int panels = std::max(4, static_cast<int>(std::ceil(cycles / 4.0)));
    const auto& rule = poincare::quadrature::gl_rule(24);
    double pw = (x_hi - x_lo) / panels;
    for (int p = 0; p < panels; ++p) {
        double a = x_lo + p * pw;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            double x = a + 0.5 * pw * (1.0 + rule.nodes[i]);
            g.inner_x.push_back(x);
            g.inner_w.push_back(0.5 * pw * rule.weights[i] * u_eval(x));
        }
    }
}

// Fill grid entries [from, to) of G(s_j) = sum_i w_i e(-2 pi i (x_i - c) s_j).
void build_range(Impl::RampGrid& g, std::size_t from, std::size_t to) {
    std::size_t n = g.inner_x.size();
    std::vector<std::complex<double>> phase(n), step(n);
    for (std::size_t i = 0; i < n; ++i) {
        double xi = g.inner_x[i] - g.center;
        step[i] = std::polar(1.0, -kTwoPi * xi * g.h);
    }
    for (std::size_t j = from; j < to; ++j) {
        if ((j - from) % 64 == 0) {
            double s = g.h * static_cast<double>(j);
            for (std::size_t i = 0; i < n; ++i)
                phase[i] = std::polar(1.0, -kTwoPi * (g.inner_x[i] - g.center) * s);
        }
        double re = 0, im = 0, cre = 0, cim = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double tr = g.inner_w[i] * phase[i].real();
            double ti = g.inner_w[i] * phase[i].imag();
            double y = tr - cre, t = re + y;
            cre = (t - re) - y;
            re = t;
            y = ti - cim;
            t = im + y;
            cim = (t - im) - y;
            im = t;
            phase[i] *= step[i];
        }
        g.values[j] = {re, im};
    }
    g.built.store(to, std::memory_order_release);
}

std::complex<double> interp8(const Impl::RampGrid& g, double s) {
    static const double bary[8] = {-1, 7, -21, 35, -35, 21, -7, 1};
    double u = s / g.h;
    std::size_t nmax = g.built.load(std::memory_order_acquire);
    long i0 = static_cast<long>(std::floor(u)) - 3;
    if (i0 < 0) i0 = 0;
    if (i0 + 8 > static_cast<long>(nmax)) i0 = static_cast<long>(nmax) - 8;
    double du = u - static_cast<double>(i0);
    std::complex<double> num{0.0, 0.0};
    double den = 0.0;
    for (int k = 0; k < 8; ++k) {
        double d = du - k;
        if (std::abs(d) < 1e-10) return g.values[i0 + k];
        double c = bary[k] / d;
        num += c * g.values[i0 + k];
        den += c;
    }
    return num / den;
}

// plateau transform int_1^2 e(-x s) dx
std::complex<double> plateau_hat(double s) {
    if (std::abs(s) < 2.0) {
        const auto& rule = poincare::quadrature::gl_rule(24);
        return poincare::quadrature::gl_panel(
            [s](double x) { return std::polar(1.0, -kTwoPi * x * s); }, 1.0, 2.0, rule);
    }
    std::complex<double> e1 = std::polar(1.0, -kTwoPi * s);
    std::complex<double> e2 = std::polar(1.0, -2.0 * kTwoPi * s);
    return (e1 - e2) / std::complex<double>(0.0, kTwoPi * s);
}

} // namespace

SmoothWindow::SmoothWindow() : impl_(new Impl) {
    init_ramp(impl_->g1, 0.5, 1.0, 0.030, impl_->s_cap);
    init_ramp(impl_->g2, 2.0, 3.0, 0.015, impl_->s_cap);
}

SmoothWindow::~SmoothWindow() { delete impl_; }

const SmoothWindow& SmoothWindow::shared() {
    static SmoothWindow instance;
    return instance;
}

double SmoothWindow::grid_cap() const { return impl_->s_cap; }

namespace {

void extend_to(SmoothWindow::Impl* im, double s) {
    for (Impl::RampGrid* g : {&im->g1, &im->g2}) {
        std::size_t need = std::min(g->values.size(),
                                    static_cast<std::size_t>(std::ceil(s / g->h)) + 12);
        if (g->built.load(std::memory_order_acquire) >= need) continue;
        std::lock_guard<std::mutex> lock(im->build_mutex);
        std::size_t have = g->built.load(std::memory_order_acquire);
        if (have >= need) continue;
        // round the target up to a chunk boundary to limit rebuild churn
        std::size_t per_chunk = static_cast<std::size_t>(im->chunk / g->h);
        std::size_t target = ((need + per_chunk - 1) / per_chunk) * per_chunk;
        target = std::min(target, g->values.size());
        build_range(*g, have, target);
    }
}

} // namespace

std::complex<double> SmoothWindow::u_hat_cached(double s) const {
    double as = std::abs(s);
    if (as > impl_->s_cap) return {0.0, 0.0};
    extend_to(impl_, as);
    std::complex<double> g1 = interp8(impl_->g1, as);
    std::complex<double> g2 = interp8(impl_->g2, as);
    std::complex<double> val = plateau_hat(as) +
                               std::polar(1.0, -kTwoPi * impl_->g1.center * as) * g1 +
                               std::polar(1.0, -kTwoPi * impl_->g2.center * as) * g2;
    return s < 0.0 ? std::conj(val) : val;
}

std::complex<double> SmoothWindow::u_hat(double t) const {
    if (std::abs(t) > 10000.0)
        throw RangeExceeded("u_hat: |t| must be <= 10^4");
    double at = std::abs(t);
    std::complex<double> total{0.0, 0.0};
    for (auto [a, b] : {std::pair{0.5, 1.0}, std::pair{1.0, 2.0}, std::pair{2.0, 3.0}}) {
        int init = std::max(2, static_cast<int>(std::ceil((b - a) * at / 3.0)));
        auto r = poincare::quadrature::gl_adaptive(
            [at](double x) { return u_eval(x) * std::polar(1.0, -kTwoPi * x * at); }, a, b, 2e-14,
            init, std::min(1 << 20, init * 64));
        total += r.value;
    }
    return t < 0.0 ? std::conj(total) : total;
}

std::complex<double> SmoothWindow::u_hat_moment(int j, double T) const {
    if (j < 0 || j > 12) throw RangeExceeded("u_hat_moment: j must be in [0, 12]");
    if (!(T > 0.0)) throw RangeExceeded("u_hat_moment: T must be positive");
    double upper = std::min(T, impl_->s_cap);
    // u_hat(-t) t^j pairs with +t: even j keeps 2 Re, odd j keeps 2i Im.
    auto integrand = [this, j](double t) {
        std::complex<double> v = u_hat_cached(t);
        double tj = std::pow(t, j);
        return (j % 2 == 0) ? std::complex<double>(2.0 * v.real() * tj, 0.0)
                            : std::complex<double>(0.0, 2.0 * v.imag() * tj);
    };
    int init = std::max(4, static_cast<int>(std::ceil(upper * 3.2)));
    auto r = poincare::quadrature::gl_adaptive(integrand, 0.0, upper, 1e-13, init,
                                               std::min(1 << 20, init * 64));
    return r.value;
}

double SmoothWindow::truncation_point(double eps) const {
    {
        std::lock_guard<std::mutex> lock(impl_->cache_mutex);
        auto it = impl_->trunc_cache.find(eps);
        if (it != impl_->trunc_cache.end()) return it->second;
    }
    const double block = 32.0, step = 0.05;
    double last_exceed = 0.0;
    int clean_blocks = 0;
    double s = step;
    while (s < impl_->s_cap && clean_blocks < 2) {
        double block_end = s + block;
        bool clean = true;
        for (; s < block_end && s < impl_->s_cap; s += step) {
            if (std::abs(u_hat_cached(s)) > eps) {
                last_exceed = s;
                clean = false;
            }
        }
        clean_blocks = clean ? clean_blocks + 1 : 0;
    }
    double result = std::min(impl_->s_cap, last_exceed + step);
    std::lock_guard<std::mutex> lock(impl_->cache_mutex);
    impl_->trunc_cache[eps] = result;
    return result;
}

double SmoothWindow::tail_mass(double s0) const {
    double end = truncation_point(1e-16);
    if (s0 >= end) return 1e-13;
    const double step = 0.01;
    double sum = 0.0;
    for (double s = s0; s < end; s += step) sum += std::abs(u_hat_cached(s)) * step;
    return 2.0 * sum + 1e-13;
}

} // namespace poincare::smoothfn
