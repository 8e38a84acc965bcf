#pragma once

#include "bspec/collision.hpp"
#include "bspec/grid.hpp"

#include <array>
#include <optional>
#include <ostream>
#include <string>

namespace bspec {

struct Moments {
    double rho = 0.0;
    std::array<double, 3> u{0.0, 0.0, 0.0};
    double T = 0.0;
    bool valid = true;   // false when rho <= 0
};

// rho from the mass mode; u and T by trapezoid quadrature on the physical
// grid (closed rule, so odd integrands cancel exactly on symmetric data).
Moments moments(const SpectralField& field);

struct EntropyResult {
    double value = 0.0;
    double clipped_fraction = 0.0;   // share of grid points below the floor
};

// integral of f~ log f~ with f~ = max(f, floor); floor > 0.
EntropyResult entropy(const SpectralField& field, double floor);

// integral of f~ log(f~/m_inf), m_inf from the field's own mass.
EntropyResult relative_entropy(const SpectralField& field, double floor);

struct NegativePart {
    double linf = 0.0;
    double l1 = 0.0;
};

NegativePart negative_part(const SpectralField& field);

struct EntropyProductionOptions {
    QuadResolution res{};        // 0: half the mode-precompute default
    int grid_n = 0;              // 0: the field's own physical resolution
    double floor_rel = 1e-14;    // floor = floor_rel * m_inf
    double max_clipped = 0.01;
    double cost_budget = 1e9;
    bool force = false;
};

struct EntropyProductionResult {
    bool computed = false;
    double value = 0.0;
    double clipped_fraction = 0.0;
    std::string reason;          // set when not computed
};

// Quarter-symmetrized entropy production of the truncated operator by
// quadrature over the relative-velocity parametrization; every quadrature
// term is nonnegative, so the result is >= 0 by construction.
EntropyProductionResult entropy_production(const SpectralField& field,
                                           const KernelSpec& spec,
                                           const EntropyProductionOptions& opts = {});

// ||(Id - P_N) Q(P_N f, P_N f)||_{H^p}: the operator applied to the
// truncated field has support exactly inside [-2N,2N]^d, so the extended
// evaluation captures the projection residual without a reference solve.
double consistency_norm(const SpectralField& f_ref, double p, const CollisionOperator& op);

struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    std::array<double, 3> u{0.0, 0.0, 0.0};
    double T = 0.0;
    double H = 0.0;
    double H_rel = 0.0;
    std::optional<double> D;
    double neg_inf = 0.0;
    double neg_l1 = 0.0;
    double l2_to_eq = 0.0;
    double sobolev = 0.0;        // configured-order norm, not part of the CSV
    double clipped_fraction = 0.0;
    bool valid = true;
};

DiagnosticsRecord compute_record(double t, const SpectralField& field,
                                 double entropy_floor_rel = 1e-14, double sobolev_p = 0.0);

// CSV layout: t,mass,u1,..,ud,T,H,H_rel,D,neg_inf,negL1,l2_to_eq
std::string csv_header(int d);
std::string csv_row(const DiagnosticsRecord& rec, int d);

} // namespace bspec
