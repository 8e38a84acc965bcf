#include "bspec/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bspec {

Rule1D gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    if (!(a < b)) throw std::invalid_argument("gauss_legendre: need a < b");

    Rule1D rule;
    rule.a = a;
    rule.b = b;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    // Newton iteration on P_n with the Chebyshev-like initial guess;
    // roots are symmetric, solve the upper half.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        // map [-1,1] -> [a,b]
        const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
        rule.nodes[i] = mid - rad * x;
        rule.nodes[n - 1 - i] = mid + rad * x;
        rule.weights[i] = rad * w;
        rule.weights[n - 1 - i] = rad * w;
    }
    return rule;
}

Rule1D periodic_uniform(int n, double period) {
    if (n < 1) throw std::invalid_argument("periodic_uniform: n must be >= 1");
    Rule1D rule;
    rule.a = 0.0;
    rule.b = period;
    rule.nodes.resize(n);
    rule.weights.assign(n, period / n);
    for (int j = 0; j < n; ++j) rule.nodes[j] = period * j / n;
    return rule;
}

SphereRule sphere_rule(int d, int n) {
    if (n < 1) throw std::invalid_argument("sphere_rule: n must be >= 1");
    SphereRule rule;
    if (d == 2) {
        Rule1D ang = periodic_uniform(n, 2.0 * std::numbers::pi);
        rule.nodes.resize(n);
        rule.weights = ang.weights;
        for (int j = 0; j < n; ++j)
            rule.nodes[j] = {std::cos(ang.nodes[j]), std::sin(ang.nodes[j]), 0.0};
        return rule;
    }
    if (d == 3) {
        Rule1D polar = gauss_legendre(n, -1.0, 1.0);
        Rule1D az = periodic_uniform(2 * n, 2.0 * std::numbers::pi);
        rule.nodes.reserve(static_cast<std::size_t>(n) * 2 * n);
        rule.weights.reserve(static_cast<std::size_t>(n) * 2 * n);
        for (int t = 0; t < n; ++t) {
            const double x = polar.nodes[t];
            const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
            for (int u = 0; u < 2 * n; ++u) {
                rule.nodes.push_back({s * std::cos(az.nodes[u]),
                                      s * std::sin(az.nodes[u]), x});
                rule.weights.push_back(polar.weights[t] * az.weights[u]);
            }
        }
        return rule;
    }
    throw std::invalid_argument("sphere_rule: d must be 2 or 3");
}

} // namespace bspec
