#pragma once

#include <cmath>
#include <vector>

namespace poincare::quadrature {

struct GLRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre rule with n points, cached per n.
const GLRule& gl_rule(int n);

template <typename F>
auto gl_panel(F&& f, double a, double b, const GLRule& rule) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto acc = f(mid + half * rule.nodes[0]) * (half * rule.weights[0]);
    for (std::size_t i = 1; i < rule.nodes.size(); ++i)
        acc += f(mid + half * rule.nodes[i]) * (half * rule.weights[i]);
    return acc;
}

template <typename F>
auto gl_composite(F&& f, double a, double b, int panels, const GLRule& rule) {
    double h = (b - a) / panels;
    auto acc = gl_panel(f, a, a + h, rule);
    for (int p = 1; p < panels; ++p)
        acc += gl_panel(f, a + p * h, a + (p + 1) * h, rule);
    return acc;
}

template <typename T>
struct QuadResult {
    T value{};
    double error_estimate = 0.0;
    int panels = 0;
};

// Composite Gauss-Legendre with panel doubling until the step-to-step
// difference falls under tol (Richardson-style error estimate).
template <typename F>
auto gl_adaptive(F&& f, double a, double b, double tol, int initial_panels, int max_panels,
                 int points_per_panel = 20) {
    const GLRule& rule = gl_rule(points_per_panel);
    int panels = std::max(1, initial_panels);
    auto prev = gl_composite(f, a, b, panels, rule);
    QuadResult<decltype(prev)> out;
    while (true) {
        int next_panels = 2 * panels;
        auto next = gl_composite(f, a, b, next_panels, rule);
        double diff = std::abs(next - prev);
        if (diff <= tol || next_panels >= max_panels) {
            out.value = next;
            out.error_estimate = diff;
            out.panels = next_panels;
            return out;
        }
        prev = next;
        panels = next_panels;
    }
}

} // namespace poincare::quadrature
