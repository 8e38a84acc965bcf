#pragma once

#include "bspec/collision_nodes.hpp"
#include "bspec/grid.hpp"
#include "bspec/kernels.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bspec {

struct QuadMeta {
    QuadResolution res;            // resolution the stored values were built at
    double tol = 0.0;              // requested certification tolerance
    double certified_delta = 0.0;  // observed doubling delta (normalized)
    int doublings = 0;
    bool sampled = false;          // d=3 tables certify on a sampled pair set
};

// Kernel modes of the truncated operator at a fixed quadrature resolution.
// The same node sums as for_each_collision_node, reassociated for speed.
Complex beta_classical(const std::array<int, 3>& l, const std::array<int, 3>& m,
                       const KernelSpec& spec, const QuadResolution& res);
Complex beta_fast_direct(const std::array<int, 3>& l, const std::array<int, 3>& m,
                         const KernelSpec& spec, const QuadResolution& res);

struct CertifiedEntry {
    Complex value;
    QuadMeta meta;
};

// Doubles the resolution until the entry moves by less than
// tol * |beta(0,0)|; throws NumericError with the last delta otherwise.
CertifiedEntry beta_certified(const std::array<int, 3>& l, const std::array<int, 3>& m,
                              const KernelSpec& spec, TruncationMethod method,
                              QuadResolution start, double tol = 1e-8,
                              int max_doublings = 4);

// Dense table of beta(l,m) over ([-N,N]^d)^2 plus the loss diagonal.
class KernelModeTable {
public:
    KernelModeTable() = default;
    KernelModeTable(const KernelSpec& spec, int N, TruncationMethod method,
                    std::vector<Complex> beta, QuadMeta meta);

    const KernelSpec& spec() const { return spec_; }
    int N() const { return N_; }
    TruncationMethod method() const { return method_; }
    const QuadMeta& meta() const { return meta_; }
    ModeBox box() const { return ModeBox{spec_.d, N_}; }

    std::size_t mode_count() const { return box().size(); }
    Complex beta(std::size_t l_flat, std::size_t m_flat) const {
        return beta_[l_flat * mode_count() + m_flat];
    }
    Complex beta(const std::array<int, 3>& l, const std::array<int, 3>& m) const {
        return beta(box().flat(l), box().flat(m));
    }
    const std::vector<Complex>& raw() const { return beta_; }
    const std::vector<Complex>& loss_diag() const { return loss_diag_; }
    double beta00() const { return beta(box().flat({0, 0, 0}), box().flat({0, 0, 0})).real(); }

private:
    KernelSpec spec_{};
    int N_ = 0;
    TruncationMethod method_ = TruncationMethod::classical;
    std::vector<Complex> beta_;
    std::vector<Complex> loss_diag_;
    QuadMeta meta_{};
};

// Full table at a fixed resolution, no certification.
std::vector<Complex> build_mode_table_raw(const KernelSpec& spec, int N,
                                          TruncationMethod method,
                                          const QuadResolution& res);

struct PrecomputeOptions {
    double tol = 1e-8;
    int max_doublings = 4;
    std::uint64_t max_bytes = 256ull << 20;
};

KernelModeTable precompute_table(const KernelSpec& spec, int N, TruncationMethod method,
                                 QuadResolution start, const PrecomputeOptions& opts = {});

// Bit-exact cache file ("BKMT"), CRC-32 checked.
void save_mode_table(const KernelModeTable& table, const std::string& path);
KernelModeTable load_mode_table(const std::string& path);
// Loads and verifies the header against the expected key; CacheError on
// any mismatch (stale cache).
KernelModeTable load_mode_table_checked(const std::string& path, const KernelSpec& spec,
                                        int N, TruncationMethod method);
// Content hash of (spec, N, method, resolution) for default cache names.
std::uint64_t mode_table_key_hash(const KernelSpec& spec, int N, TruncationMethod method,
                                  const QuadResolution& res);

// Separated representation of the fast-truncation modes for the constant
// kernel family: beta(l,m) ~ sum_p theta_w alpha_p(l) alpha'_p(m).
class DecoupledWeights {
public:
    DecoupledWeights(const KernelSpec& spec, int N, int M);

    const KernelSpec& spec() const { return spec_; }
    int N() const { return N_; }
    int M() const { return M_; }
    double theta_weight() const;

    Complex alpha(int p, const std::array<int, 3>& l) const;
    Complex alpha_prime(int p, const std::array<int, 3>& m) const;
    // over the flat mode box of size (2N+1)^2
    void fill_alpha(int p, std::vector<Complex>& out) const;
    void fill_alpha_prime(int p, std::vector<Complex>& out) const;

    Complex reconstruct(const std::array<int, 3>& l, const std::array<int, 3>& m) const;
    const std::vector<Complex>& loss_diag() const { return loss_diag_; }
    double beta00() const;

private:
    KernelSpec spec_{};
    int N_ = 0;
    int M_ = 0;
    double kernel_const_ = 0.0;   // constant kernel density on the parametrization
    std::vector<double> dir_cos_, dir_sin_;
    std::vector<Complex> loss_diag_;
};

DecoupledWeights decoupled_weights(const KernelSpec& spec, int N, int M);

} // namespace bspec
