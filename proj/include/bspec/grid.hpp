#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace bspec {

using Complex = std::complex<double>;

// Velocity torus [-L,L]^d sampled on n_phys equispaced points per axis,
// carrying trigonometric polynomials of degree at most N per axis.
struct TorusGrid {
    int d = 2;          // dimension, 2 or 3
    int N = 1;          // modes per half-axis
    double L = 1.0;     // half-width of the box
    int n_phys = 0;     // physical points per axis, >= 2N+1

    static TorusGrid make(int d, int N, double L, int n_phys = 0);

    int modes_per_axis() const { return 2 * N + 1; }
    std::size_t mode_count() const;
    std::size_t phys_count() const;
    double cell() const { return 2.0 * L / n_phys; }
    // j-th physical node coordinate along one axis
    double node(int j) const { return -L + 2.0 * L * j / n_phys; }
    double volume() const;   // (2L)^d

    bool operator==(const TorusGrid& o) const {
        return d == o.d && N == o.N && L == o.L && n_phys == o.n_phys;
    }
};

// Flat indexing of the mode box [-N,N]^d, row-major with k1 slowest.
struct ModeBox {
    int d;
    int N;

    int per_axis() const { return 2 * N + 1; }
    std::size_t size() const;
    std::size_t flat(const std::array<int, 3>& k) const;
    std::array<int, 3> unflat(std::size_t idx) const;
    bool contains(const std::array<int, 3>& k) const;
    std::size_t flip(std::size_t idx) const;   // index of -k
};

// Complex Fourier coefficients f̂_k over k in [-N,N]^d.  Convention:
// f(v) = sum_k coeff(k) e^{i pi k.v / L}, so mass = (2L)^d coeff(0).
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(const TorusGrid& grid);

    const TorusGrid& grid() const { return grid_; }
    ModeBox box() const { return ModeBox{grid_.d, grid_.N}; }
    std::size_t size() const { return coeffs_.size(); }

    Complex& operator[](std::size_t i) { return coeffs_[i]; }
    const Complex& operator[](std::size_t i) const { return coeffs_[i]; }
    Complex coeff(const std::array<int, 3>& k) const;
    void set_coeff(const std::array<int, 3>& k, Complex value);

    std::vector<Complex>& data() { return coeffs_; }
    const std::vector<Complex>& data() const { return coeffs_; }

    double mass() const;      // (2L)^d Re coeff(0)
    double l1_coeff_norm() const;  // sum_k |coeff(k)|

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    // Averages coeff(k) with conj(coeff(-k)); removes rounding drift.
    void symmetrize_hermitian();

private:
    TorusGrid grid_;
    std::vector<Complex> coeffs_;
};

// Largest |coeff(k) - conj(coeff(-k))| over the box, relative to max |coeff|.
double hermitian_defect(const SpectralField& f);
bool is_hermitian(const SpectralField& f, double tol = 1e-12);

// DFT analysis of physical samples: returns the f̂_k of the trigonometric
// interpolant restricted to |k|_inf <= N.  Exact for band-limited data.
SpectralField forward_transform(const std::vector<double>& values, const TorusGrid& grid);

// Pointwise evaluation of the truncated series on the uniform grid
// (n_override points per axis when nonzero).  Rejects non-Hermitian input.
std::vector<double> inverse_transform(const SpectralField& field, int n_override = 0,
                                      double hermitian_tol = 1e-12);

// Orthogonal truncation to |k|_inf <= N_target.
SpectralField project(const SpectralField& field, int N_target);

// c_k = sum_{l+m=k, |l|,|m| <= N} a_l b_m for |k|_inf <= N, alias-free.
SpectralField convolve(const SpectralField& a, const SpectralField& b);

// ((2L)^d sum_k (1+|pi k/L|^2)^p |f̂_k|^2)^{1/2}; p = 0 is the L2 norm.
double sobolev_norm(const SpectralField& field, double p);

// ||f - m_inf||_{L2} with m_inf the constant of the same mass.
double l2_distance_to_equilibrium(const SpectralField& field);

} // namespace bspec
