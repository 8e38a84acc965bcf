#pragma once

#include <array>

namespace bspec {

// Angular law b(cos theta).  Only the constant family is exercised; the
// descriptor keeps the extension point for non-constant laws.
struct AngularLaw {
    enum class Kind { constant } kind = Kind::constant;
    double value = 1.0;

    double operator()(double /*cos_theta*/) const { return value; }
    bool is_constant() const { return kind == Kind::constant; }
};

// Collision kernel parameters: B(|u|, cos t) = C_gamma |u|^gamma b(cos t),
// together with the truncation radius R and the box half-width L.
struct KernelSpec {
    int d = 2;
    double gamma = 0.0;
    double C_gamma = 1.0;
    AngularLaw angular{};
    double R = 0.0;
    double L = 0.0;
    bool allow_subcritical_R = false;   // accept R < sqrt(2) L for experiments

    void validate() const;
    bool dealiasing_ok() const;          // R >= sqrt(2) L
    // Separable family for the decoupled fast evaluation: constant kernel
    // density on the orthogonal parametrization.
    bool separable() const { return (d == 2 && gamma == 0.0) || (d == 3 && gamma == 1.0); }
};

// VHS kernel value B(|u|, cos theta).
double eval_B(double u_norm, double cos_theta, const KernelSpec& spec);

// Kernel of the relative-velocity/scattering-direction change of variables:
// 2^{d-1} (1 - g^.w)^{d/2-1} B(|g|, 2(g^.w)^2 - 1).
double eval_B_class(const std::array<double, 3>& g, const std::array<double, 3>& omega,
                    const KernelSpec& spec);

// Kernel of the orthogonal (y,z) parametrization:
// 2^{d-1} B(|y+z|, -y.(y+z)/(|y||y+z|)) |y+z|^{-(d-2)}; the delta(y.z)
// constraint is handled by the caller's quadrature, not here.
double eval_B_fast(const std::array<double, 3>& y, const std::array<double, 3>& z,
                   const KernelSpec& spec);

} // namespace bspec
