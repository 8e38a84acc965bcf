#include "bspec/kernels.hpp"

#include "bspec/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace bspec {

namespace {

inline double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm3(const std::array<double, 3>& a) { return std::sqrt(dot3(a, a)); }

} // namespace

void KernelSpec::validate() const {
    if (d < 2 || d > 3) throw ConfigError("kernel: d must be 2 or 3");
    if (gamma < 0.0 || gamma > 1.0)
        throw ConfigError("kernel.gamma must lie in [0,1]");
    if (!(C_gamma > 0.0)) throw ConfigError("kernel.C_gamma must be positive");
    if (!(R > 0.0)) throw ConfigError("kernel.R must be positive");
    if (!(L > 0.0)) throw ConfigError("kernel.L must be positive");
    if (!dealiasing_ok() && !allow_subcritical_R)
        throw ConfigError("kernel.R < sqrt(2)*L violates dealiasing "
                          "(set kernel.allow_subcritical_R to proceed)");
}

bool KernelSpec::dealiasing_ok() const {
    return R >= std::sqrt(2.0) * L * (1.0 - 1e-12);
}

double eval_B(double u_norm, double cos_theta, const KernelSpec& spec) {
    if (u_norm < 0.0) throw std::invalid_argument("eval_B: negative relative speed");
    double phi = (spec.gamma == 0.0) ? 1.0 : std::pow(u_norm, spec.gamma);
    return spec.C_gamma * phi * spec.angular(cos_theta);
}

double eval_B_class(const std::array<double, 3>& g, const std::array<double, 3>& omega,
                    const KernelSpec& spec) {
    const double on = norm3(omega);
    if (std::abs(on - 1.0) > 1e-12)
        throw std::invalid_argument("eval_B_class: omega must be a unit vector");
    const double gn = norm3(g);
    if (gn == 0.0) return 0.0;  // removable for gamma > 0, fixed to 0 by convention

    const double x = dot3(g, omega) / gn;
    const double pre = std::pow(2.0, spec.d - 1);
    const double ang = (spec.d == 2) ? 1.0 : std::sqrt(std::max(0.0, 1.0 - x));
    return pre * ang * eval_B(gn, 2.0 * x * x - 1.0, spec);
}

double eval_B_fast(const std::array<double, 3>& y, const std::array<double, 3>& z,
                   const KernelSpec& spec) {
    const double pre = std::pow(2.0, spec.d - 1);
    const double net = spec.gamma - (spec.d - 2);

    // Exactly constant cases carry the separability of the fast method.
    if (net == 0.0 && spec.angular.is_constant())
        return pre * spec.C_gamma * spec.angular.value;

    std::array<double, 3> w{y[0] + z[0], y[1] + z[1], y[2] + z[2]};
    const double wn = norm3(w);
    const double yn = norm3(y);
    if ((wn == 0.0 && net < 0.0) || (yn == 0.0 && !spec.angular.is_constant()))
        throw std::invalid_argument("eval_B_fast: singular input");
    if (wn == 0.0) return 0.0;  // net > 0 here

    double cos_t = spec.angular.is_constant() ? 0.0 : -dot3(y, w) / (yn * wn);
    return pre * spec.C_gamma * spec.angular(cos_t) * std::pow(wn, net);
}

} // namespace bspec
