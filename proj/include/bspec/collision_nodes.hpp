#pragma once

#include "bspec/kernels.hpp"
#include "bspec/quadrature.hpp"

#include <array>
#include <cstddef>
#include <stdexcept>

namespace bspec {

enum class TruncationMethod { classical, fast };

struct QuadResolution {
    int radial = 0;
    int angular = 0;

    QuadResolution doubled() const { return {2 * radial, 2 * angular}; }
};

// Resolution heuristic: integrand oscillation grows with N.
inline QuadResolution default_resolution(int N) { return {2 * N + 8, 4 * N + 8}; }

inline int even_up(int n) { return (n % 2 == 0) ? n : n + 1; }

// One quadrature node of the truncated collision integral.  Offsets are the
// translation maps applied to v: v' = v + post, v'_* = v + post_star,
// v_* = v + star.  The weight carries rule weights times the kernel value.
struct CollisionNode {
    std::array<double, 3> post;
    std::array<double, 3> post_star;
    std::array<double, 3> star;
    double weight;
};

std::size_t collision_node_count(const KernelSpec& spec, TruncationMethod method,
                                 const QuadResolution& res);

// Iterates the product quadrature of the truncated collision integral.
//
// classical: (r, ghat, omega) over [0,R] x S^{d-1} x S^{d-1}; both sphere
// factors share one rule so the k=0 mode of gain-loss cancels exactly.
// fast: (theta, rho, rho') over [0,2pi) x [0,R] x [-R,R] (d = 2); the
// orthogonal parametrization absorbs the delta constraint with unit Jacobian.
template <typename F>
void for_each_collision_node(const KernelSpec& spec, TruncationMethod method,
                             const QuadResolution& res, F&& fn) {
    if (method == TruncationMethod::classical) {
        Rule1D radial = gauss_legendre(res.radial, 0.0, spec.R);
        SphereRule sph = sphere_rule(spec.d, even_up(res.angular));
        const std::size_t nb = sph.nodes.size();
        for (int a = 0; a < res.radial; ++a) {
            const double r = radial.nodes[a];
            double measure = radial.weights[a] * r;  // r^{d-1} dr
            if (spec.d == 3) measure *= r;
            for (std::size_t b = 0; b < nb; ++b) {
                const auto& gh = sph.nodes[b];
                std::array<double, 3> g{r * gh[0], r * gh[1], r * gh[2]};
                for (std::size_t j = 0; j < nb; ++j) {
                    const auto& w = sph.nodes[j];
                    const double B = eval_B_class(g, w, spec);
                    CollisionNode node;
                    for (int ax = 0; ax < 3; ++ax) {
                        node.post[ax] = -0.5 * (g[ax] - r * w[ax]);
                        node.post_star[ax] = -0.5 * (g[ax] + r * w[ax]);
                        node.star[ax] = g[ax];
                    }
                    node.weight = measure * sph.weights[b] * sph.weights[j] * B;
                    fn(node);
                }
            }
        }
        return;
    }

    if (spec.d != 2)
        throw std::invalid_argument("fast truncation quadrature requires d = 2");
    Rule1D theta = periodic_uniform(even_up(res.angular), 2.0 * 3.14159265358979323846);
    Rule1D rho = gauss_legendre(res.radial, 0.0, spec.R);
    Rule1D rhop = gauss_legendre(2 * res.radial, -spec.R, spec.R);
    for (std::size_t t = 0; t < theta.nodes.size(); ++t) {
        const double c = std::cos(theta.nodes[t]);
        const double s = std::sin(theta.nodes[t]);
        for (std::size_t i = 0; i < rho.nodes.size(); ++i) {
            for (std::size_t j = 0; j < rhop.nodes.size(); ++j) {
                std::array<double, 3> y{rho.nodes[i] * c, rho.nodes[i] * s, 0.0};
                std::array<double, 3> z{-rhop.nodes[j] * s, rhop.nodes[j] * c, 0.0};
                CollisionNode node;
                node.post = y;
                node.post_star = z;
                node.star = {y[0] + z[0], y[1] + z[1], 0.0};
                node.weight = theta.weights[t] * rho.weights[i] * rhop.weights[j] *
                              eval_B_fast(y, z, spec);
                fn(node);
            }
        }
    }
}

} // namespace bspec
