#include "bspec/collision.hpp"

#include "bspec/errors.hpp"
#include "bspec/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bspec {

namespace {

constexpr double kPi = std::numbers::pi;

inline int wrap(int k, int n) { return ((k % n) + n) % n; }

std::size_t padded_index(const std::array<int, 3>& k, int d, int nc) {
    std::size_t idx = 0;
    for (int ax = 0; ax < d; ++ax) idx = idx * nc + static_cast<std::size_t>(wrap(k[ax], nc));
    return idx;
}

} // namespace

CollisionOperator CollisionOperator::classical(std::shared_ptr<const KernelModeTable> table,
                                               CollisionBudget budget) {
    CollisionOperator op;
    op.table_ = std::move(table);
    op.budget_ = budget;
    const int N = op.table_->N();
    const int d = op.table_->spec().d;
    const int cap = d == 2 ? budget.max_classical_N_d2 : budget.max_classical_N_d3;
    if (N > cap && !budget.force) {
        std::ostringstream msg;
        msg << "classical evaluation at N=" << N << " (d=" << d << ") exceeds the O(N^2d) "
            << "budget cap " << cap << "; use the fast path";
        throw BudgetError(msg.str());
    }
    return op;
}

CollisionOperator CollisionOperator::fast(std::shared_ptr<const DecoupledWeights> weights) {
    CollisionOperator op;
    op.weights_ = std::move(weights);
    return op;
}

TruncationMethod CollisionOperator::path() const {
    return table_ ? table_->method() : TruncationMethod::fast;
}

int CollisionOperator::N() const { return table_ ? table_->N() : weights_->N(); }

const KernelSpec& CollisionOperator::spec() const {
    return table_ ? table_->spec() : weights_->spec();
}

double CollisionOperator::beta00() const {
    return table_ ? table_->beta00() : weights_->beta00();
}

void CollisionOperator::check_field(const SpectralField& f) const {
    const TorusGrid& g = f.grid();
    if (g.N != N() || g.d != spec().d || g.L != spec().L)
        throw std::invalid_argument("collision operator does not match the field grid");
}

SpectralField CollisionOperator::eval(const SpectralField& f, bool gain_part,
                                      bool loss_part, int N_out) const {
    check_field(f);
    const TorusGrid& g = f.grid();
    const int d = g.d;
    const int N = g.N;
    TorusGrid out_grid = TorusGrid::make(d, N_out, g.L);
    SpectralField out(out_grid);
    ModeBox in_box = f.box();
    ModeBox out_box = out.box();

    if (table_) {
        const auto& T = *table_;
        const std::size_t count = in_box.size();
        for (std::size_t il = 0; il < count; ++il) {
            auto l = in_box.unflat(il);
            for (std::size_t im = 0; im < count; ++im) {
                auto m = in_box.unflat(im);
                std::array<int, 3> k{l[0] + m[0], l[1] + m[1], l[2] + m[2]};
                if (!out_box.contains(k)) continue;
                Complex c{0.0, 0.0};
                if (gain_part) c += T.beta(il, im);
                if (loss_part) c -= T.loss_diag()[im];
                out[out_box.flat(k)] += c * f[il] * f[im];
            }
        }
        return out;
    }

    // Fast path: Q+_k = sum_p theta_w (alpha_p f)*(alpha'_p f) as a padded
    // cyclic convolution; all directions accumulate in the transform domain
    // so a single inverse transform finishes the sum.  Accumulation is
    // chunked in fixed order to keep results thread-count independent.
    const auto& W = *weights_;
    const int M = W.M();
    const int nc = fft::next_fast_size(4 * N + 2);
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(nc);
    std::array<int, 3> dims{nc, nc, nc};

    std::vector<Complex> acc(total, Complex{0.0, 0.0});
    if (gain_part) {
        constexpr int kChunks = 8;
        std::vector<std::vector<Complex>> chunk_acc(kChunks);

#pragma omp parallel for schedule(static, 1)
        for (int c = 0; c < kChunks; ++c) {
            const int p_lo = static_cast<int>(static_cast<long>(M) * c / kChunks);
            const int p_hi = static_cast<int>(static_cast<long>(M) * (c + 1) / kChunks);
            if (p_lo == p_hi) continue;
            auto& local = chunk_acc[c];
            local.assign(total, Complex{0.0, 0.0});
            std::vector<Complex> u(total), w(total), row;
            for (int p = p_lo; p < p_hi; ++p) {
                std::fill(u.begin(), u.end(), Complex{0.0, 0.0});
                std::fill(w.begin(), w.end(), Complex{0.0, 0.0});
                for (std::size_t i = 0; i < f.size(); ++i) {
                    auto k = in_box.unflat(i);
                    const std::size_t dst = padded_index(k, d, nc);
                    u[dst] = W.alpha(p, k) * f[i];
                    w[dst] = W.alpha_prime(p, k) * f[i];
                }
                fft::dft(d, dims.data(), u.data(), -1);
                fft::dft(d, dims.data(), w.data(), -1);
                for (std::size_t i = 0; i < total; ++i) local[i] += u[i] * w[i];
            }
        }
        for (int c = 0; c < kChunks; ++c) {
            if (chunk_acc[c].empty()) continue;
            for (std::size_t i = 0; i < total; ++i) acc[i] += chunk_acc[c][i];
        }
        const double tw = W.theta_weight();
        for (auto& v : acc) v *= tw;
    }

    if (loss_part) {
        std::vector<Complex> u(total, Complex{0.0, 0.0}), w(total, Complex{0.0, 0.0});
        const auto& diag = W.loss_diag();
        for (std::size_t i = 0; i < f.size(); ++i) {
            auto k = in_box.unflat(i);
            const std::size_t dst = padded_index(k, d, nc);
            u[dst] = f[i];
            w[dst] = diag[i] * f[i];
        }
        fft::dft(d, dims.data(), u.data(), -1);
        fft::dft(d, dims.data(), w.data(), -1);
        for (std::size_t i = 0; i < total; ++i) acc[i] -= u[i] * w[i];
    }

    fft::dft(d, dims.data(), acc.data(), +1);
    const double norm = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto k = out_box.unflat(i);
        out[i] = norm * acc[padded_index(k, d, nc)];
    }
    return out;
}

SpectralField CollisionOperator::gain(const SpectralField& f) const {
    return eval(f, true, false, N());
}

SpectralField CollisionOperator::loss(const SpectralField& f) const {
    SpectralField out = eval(f, false, true, N());
    out *= -1.0;   // eval accumulates the loss negatively
    return out;
}

SpectralField CollisionOperator::full(const SpectralField& f) const {
    SpectralField out = eval(f, true, true, N());
    const std::size_t zero = out.box().flat({0, 0, 0});
    const double l1 = f.l1_coeff_norm();
    const double guard = 1e-12 * l1 * l1 * std::max(1.0, beta00());
    if (std::abs(out[zero]) > guard)
        throw NumericError("collision operator lost mass beyond rounding; "
                           "kernel mode table is inconsistent");
    // the k=0 component vanishes identically; pin it to keep long runs exact
    out[zero] = Complex{0.0, 0.0};
    return out;
}

double CollisionOperator::mass_mode_residual(const SpectralField& f) const {
    SpectralField raw = eval(f, true, true, N());
    return std::abs(raw[raw.box().flat({0, 0, 0})]);
}

SpectralField CollisionOperator::gain_extended(const SpectralField& f) const {
    return eval(f, true, false, 2 * N());
}

SpectralField CollisionOperator::full_extended(const SpectralField& f) const {
    return eval(f, true, true, 2 * N());
}

ShiftedEvaluator::ShiftedEvaluator(const std::vector<double>& values, const TorusGrid& grid)
    : grid_(grid) {
    if (values.size() != grid.phys_count())
        throw std::invalid_argument("ShiftedEvaluator: value count does not match grid");
    coeff_.assign(values.begin(), values.end());
    std::array<int, 3> dims{grid.n_phys, grid.n_phys, grid.n_phys};
    fft::dft(grid.d, dims.data(), coeff_.data(), -1);
    const double norm = 1.0 / static_cast<double>(grid.phys_count());
    for (auto& c : coeff_) c *= norm;
}

void ShiftedEvaluator::shift(const std::array<double, 3>& offset,
                             std::vector<double>& out) const {
    const int n = grid_.n_phys;
    const int d = grid_.d;
    const std::size_t total = grid_.phys_count();

    // per-axis modulation; the Nyquist bin (even n) carries the symmetric
    // cosine interpolant
    std::array<std::vector<Complex>, 3> phase;
    for (int ax = 0; ax < d; ++ax) {
        phase[ax].resize(n);
        for (int j = 0; j < n; ++j) {
            int freq = j <= n / 2 ? j : j - n;
            const double arg = kPi * freq * offset[ax] / grid_.L;
            if (2 * j == n)
                phase[ax][j] = Complex{std::cos(arg), 0.0};
            else
                phase[ax][j] = std::polar(1.0, arg);
        }
    }

    std::vector<Complex> buf(total);
    if (d == 2) {
        for (int j0 = 0; j0 < n; ++j0)
            for (int j1 = 0; j1 < n; ++j1) {
                const std::size_t i = static_cast<std::size_t>(j0) * n + j1;
                buf[i] = coeff_[i] * phase[0][j0] * phase[1][j1];
            }
    } else {
        std::size_t i = 0;
        for (int j0 = 0; j0 < n; ++j0)
            for (int j1 = 0; j1 < n; ++j1)
                for (int j2 = 0; j2 < n; ++j2, ++i)
                    buf[i] = coeff_[i] * phase[0][j0] * phase[1][j1] * phase[2][j2];
    }
    std::array<int, 3> dims{n, n, n};
    fft::dft(d, dims.data(), buf.data(), +1);
    out.resize(total);
    for (std::size_t i = 0; i < total; ++i) out[i] = buf[i].real();
}

std::vector<double> collision_physical(const std::vector<double>& values,
                                       const TorusGrid& grid, const KernelSpec& spec,
                                       const PhysicalEvalOptions& opts) {
    if (grid.d != spec.d)
        throw std::invalid_argument("collision_physical: dimension mismatch");
    QuadResolution res = opts.res;
    if (res.radial == 0) res = default_resolution(grid.N);

    const double nodes = static_cast<double>(
        collision_node_count(spec, opts.method, res));
    const double cost = nodes * static_cast<double>(grid.phys_count());
    if (cost > opts.cost_budget && !opts.force) {
        std::ostringstream msg;
        msg << "physical-space collision evaluation cost " << cost
            << " exceeds budget " << opts.cost_budget;
        throw BudgetError(msg.str());
    }

    std::vector<CollisionNode> nodes_list;
    nodes_list.reserve(static_cast<std::size_t>(nodes));
    for_each_collision_node(spec, opts.method, res,
                            [&](const CollisionNode& n) { nodes_list.push_back(n); });

    ShiftedEvaluator ev(values, grid);
    const std::size_t total = grid.phys_count();
    const bool want_gain = opts.part != CollisionPart::loss;
    const bool want_loss = opts.part != CollisionPart::gain;
    // standalone loss requests report L(f) f itself, not its negative
    const double loss_sign = opts.part == CollisionPart::loss ? 1.0 : -1.0;

    constexpr int kChunks = 8;
    std::vector<std::vector<double>> chunk_out(kChunks);

#pragma omp parallel for schedule(static, 1)
    for (int c = 0; c < kChunks; ++c) {
        const std::size_t lo = nodes_list.size() * c / kChunks;
        const std::size_t hi = nodes_list.size() * (c + 1) / kChunks;
        if (lo == hi) continue;
        auto& local = chunk_out[c];
        local.assign(total, 0.0);
        std::vector<double> fpost, fpost_star, fstar;
        for (std::size_t q = lo; q < hi; ++q) {
            const CollisionNode& node = nodes_list[q];
            if (node.weight == 0.0) continue;
            if (want_gain) {
                ev.shift(node.post, fpost);
                ev.shift(node.post_star, fpost_star);
                for (std::size_t i = 0; i < total; ++i)
                    local[i] += node.weight * fpost_star[i] * fpost[i];
            }
            if (want_loss) {
                ev.shift(node.star, fstar);
                for (std::size_t i = 0; i < total; ++i)
                    local[i] += loss_sign * node.weight * fstar[i] * values[i];
            }
        }
    }

    std::vector<double> out(total, 0.0);
    for (int c = 0; c < kChunks; ++c) {
        if (chunk_out[c].empty()) continue;
        for (std::size_t i = 0; i < total; ++i) out[i] += chunk_out[c][i];
    }
    return out;
}

} // namespace bspec
