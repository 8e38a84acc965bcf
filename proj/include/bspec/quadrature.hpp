#pragma once

#include <array>
#include <vector>

namespace bspec {

// One-dimensional rule on [a,b]; weights sum to b-a.
struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
    double a = 0.0;
    double b = 0.0;
};

// Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.
Rule1D gauss_legendre(int n, double a, double b);

// Uniform rule with nodes j*period/n; spectrally accurate for periodic
// integrands.
Rule1D periodic_uniform(int n, double period);

// Quadrature on the unit sphere S^{d-1}.  d=2: n uniform angles.
// d=3: Gauss-Legendre in cos(theta) (n nodes) x uniform azimuth (2n nodes).
struct SphereRule {
    std::vector<std::array<double, 3>> nodes;
    std::vector<double> weights;
};

SphereRule sphere_rule(int d, int n);

} // namespace bspec
