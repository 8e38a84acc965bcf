#pragma once

#include "bspec/collision.hpp"
#include "bspec/grid.hpp"

#include <string>
#include <utility>
#include <vector>

namespace bspec {

// Eigenvalues a_k of the collision operator linearized around the constant
// equilibrium: the Fourier modes diagonalize it, the linearized decay rate
// of mode k is m_inf |a_k|.
struct LinearSpectrum {
    KernelSpec spec;
    TruncationMethod method = TruncationMethod::fast;
    int N = 0;
    std::vector<double> a;        // over the flat mode box
    double a_inf = 0.0;           // limit -beta(0,0)
    double lambda = 0.0;          // min |a_k|, k != 0
    std::array<int, 3> argmin{0, 0, 0};
    double max_imag = 0.0;        // largest imaginary residue observed
    double max_cross_delta = 0.0; // direct vs beta-combination discrepancy

    double at(const std::array<int, 3>& k) const {
        return a[ModeBox{spec.d, N}.flat(k)];
    }
};

struct EigenOptions {
    QuadResolution res{};          // 0: mode-precompute default
    double cross_tol = 1e-9;       // relative to |a_inf|; hard failure beyond
    double cost_budget = 2e8;      // modes x nodes for the dense path
    bool force = false;
};

// a_k by quadrature, cross-checked against beta(0,k)+beta(k,0)-beta(k,k)-
// beta(0,0) on the same rule; disagreement is a convention bug, not noise,
// and throws.
LinearSpectrum eigenvalues(const KernelSpec& spec, int N, TruncationMethod method,
                           const EigenOptions& opts = {});

struct SpectralGap {
    double lambda = 0.0;
    std::array<int, 3> argmin{0, 0, 0};
    std::vector<double> trend;   // lambda over nested boxes N' = 1..N
};

SpectralGap spectral_gap(const LinearSpectrum& spectrum);

// Spreading constants of the gain operator: mu0 = sqrt(1-y0^2)+y0 at
// y0 = R/(2 sqrt(2) L), and mu = (1+mu0)/2.
struct SpreadingConstants {
    double y0 = 0.0;
    double mu0 = 0.0;
    double mu = 0.0;
};

SpreadingConstants mu0(double R, double L);

struct SpreadingReport {
    bool skipped = false;   // r >= sqrt(2) L covers the torus already
    bool pass = false;
    double r = 0.0;
    double mu = 0.0;
    double min_inner = 0.0; // min of the gain over B(0, mu r); the C0 estimate
    double radius_one = 0.0;
    double radius_two = 0.0; // after a second application of the gain
    std::string note;
};

struct SpreadingOptions {
    int grid_n = 128;
    QuadResolution res{12, 24};
    double positivity_tol = 1e-9;   // relative threshold for the radius scan
};

// Gain of a mollified ball indicator (mollification width = 2 grid cells):
// checks positivity on B(0, mu r) and the growth of the positivity radius
// under a second application.
SpreadingReport check_spreading(double r, const KernelSpec& spec,
                                const SpreadingOptions& opts = {});

struct RelaxationFit {
    double rate = 0.0;   // decay rate (positive)
    double r2 = 0.0;     // regression quality
    int rows_used = 0;
};

// Least-squares slope of log(l2_to_eq) against t over the tail window.
RelaxationFit fit_relaxation(const std::vector<std::pair<double, double>>& series);

// (t, l2_to_eq) pairs from a diagnostics CSV.
std::vector<std::pair<double, double>> read_l2_series_csv(const std::string& path);

} // namespace bspec
