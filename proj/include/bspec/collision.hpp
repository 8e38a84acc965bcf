#pragma once

#include "bspec/grid.hpp"
#include "bspec/modes.hpp"

#include <memory>
#include <vector>

namespace bspec {

struct CollisionBudget {
    int max_classical_N_d2 = 8;
    int max_classical_N_d3 = 4;
    bool force = false;
};

// Spectral evaluation of the truncated collision operator.  The classical
// path contracts a dense mode table; the fast path runs one padded FFT
// convolution per decoupled direction.
class CollisionOperator {
public:
    static CollisionOperator classical(std::shared_ptr<const KernelModeTable> table,
                                       CollisionBudget budget = {});
    static CollisionOperator fast(std::shared_ptr<const DecoupledWeights> weights);

    TruncationMethod path() const;
    int N() const;
    const KernelSpec& spec() const;
    double beta00() const;

    // Q+ projected to |k|_inf <= N
    SpectralField gain(const SpectralField& f) const;
    // loss convolution, projected likewise
    SpectralField loss(const SpectralField& f) const;
    // P_N(gain - loss); verifies the k=0 cancellation, then pins it to zero
    SpectralField full(const SpectralField& f) const;
    // k=0 coefficient of gain - loss before pinning (conservation residual)
    double mass_mode_residual(const SpectralField& f) const;

    // Unprojected variants supported on |k|_inf <= 2N (exact support bound
    // of a bilinear product of degree-N polynomials).
    SpectralField gain_extended(const SpectralField& f) const;
    SpectralField full_extended(const SpectralField& f) const;

private:
    CollisionOperator() = default;
    void check_field(const SpectralField& f) const;
    SpectralField eval(const SpectralField& f, bool gain_part, bool loss_part,
                       int N_out) const;

    std::shared_ptr<const KernelModeTable> table_;
    std::shared_ptr<const DecoupledWeights> weights_;
    CollisionBudget budget_{};
};

enum class CollisionPart { gain, loss, full };

struct PhysicalEvalOptions {
    TruncationMethod method = TruncationMethod::classical;
    QuadResolution res{};
    CollisionPart part = CollisionPart::full;
    double cost_budget = 1e9;   // grid points x quadrature nodes
    bool force = false;
};

// Pointwise quadrature of the truncated collision integral on the periodic
// physical grid: oracle and diagnostics path, O(n^d x nodes).
// `values` are samples of f; shifted evaluations use the trigonometric
// interpolant of the samples (exact for band-limited data).
std::vector<double> collision_physical(const std::vector<double>& values,
                                       const TorusGrid& grid, const KernelSpec& spec,
                                       const PhysicalEvalOptions& opts);

// Shifted-grid evaluation helper shared with the entropy-production
// diagnostic: samples of the interpolant of `values` at v + offset.
class ShiftedEvaluator {
public:
    ShiftedEvaluator(const std::vector<double>& values, const TorusGrid& grid);

    const TorusGrid& grid() const { return grid_; }
    // fills out with f(v_j + offset) over the physical grid
    void shift(const std::array<double, 3>& offset, std::vector<double>& out) const;

private:
    TorusGrid grid_;
    std::vector<Complex> coeff_;   // full interpolant spectrum, DFT layout
};

} // namespace bspec
