#include "bspec/modes.hpp"

#include "bspec/errors.hpp"
#include "bspec/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace bspec {

namespace {

constexpr double kPi = std::numbers::pi;

Complex beta_entry(const std::array<int, 3>& l, const std::array<int, 3>& m,
                   const KernelSpec& spec, TruncationMethod method,
                   const QuadResolution& res) {
    const double w = kPi / spec.L;
    Complex acc{0.0, 0.0};
    for_each_collision_node(spec, method, res, [&](const CollisionNode& node) {
        double phase = 0.0;
        for (int ax = 0; ax < spec.d; ++ax)
            phase += l[ax] * node.post[ax] + m[ax] * node.post_star[ax];
        acc += node.weight * std::polar(1.0, w * phase);
    });
    return acc;
}

double beta_abs_scale(const KernelSpec& spec, TruncationMethod method,
                      const QuadResolution& res) {
    double acc = 0.0;
    for_each_collision_node(spec, method, res,
                            [&](const CollisionNode& node) { acc += node.weight; });
    return acc;  // equals beta(0,0) for nonnegative kernels
}

// exp(i x) with relative care near x = 0 is not needed; std::polar suffices.
// (e^{ix}-1)/(ix), the radial mode integral of a constant density on [0,R].
Complex cexp_ratio(double x) {
    if (std::abs(x) < 1e-8) return Complex{1.0 - x * x / 6.0, 0.5 * x};
    Complex num = std::polar(1.0, x) - Complex{1.0, 0.0};
    return num / Complex{0.0, x};
}

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

std::vector<Complex> build_classical_table(const KernelSpec& spec, int N,
                                           const QuadResolution& res) {
    const int d = spec.d;
    const ModeBox box{d, N};
    const ModeBox qbox{d, 2 * N};
    const std::size_t count = box.size();
    const std::size_t qcount = qbox.size();
    std::vector<Complex> beta(count * count, Complex{0.0, 0.0});

    Rule1D radial = gauss_legendre(res.radial, 0.0, spec.R);
    SphereRule sph = sphere_rule(d, even_up(res.angular));
    const std::size_t nb = sph.nodes.size();
    const int qa = qbox.per_axis();

    // A(g^.w) s_j, independent of the radial node
    std::vector<double> amat(nb * nb);
    const double pre = std::pow(2.0, d - 1);
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t j = 0; j < nb; ++j) {
            double x = 0.0;
            for (int ax = 0; ax < 3; ++ax) x += sph.nodes[b][ax] * sph.nodes[j][ax];
            x = std::clamp(x, -1.0, 1.0);
            const double ang = (d == 2) ? 1.0 : std::sqrt(std::max(0.0, 1.0 - x));
            amat[b * nb + j] =
                sph.weights[j] * pre * ang * spec.angular(2.0 * x * x - 1.0);
        }
    }

    std::vector<Complex> gphase(static_cast<std::size_t>(d) * qa * nb);
    std::vector<Complex> wphase(static_cast<std::size_t>(d) * qa * nb);
    std::vector<Complex> tmat(qcount * nb);

    for (int a = 0; a < res.radial; ++a) {
        const double r = radial.nodes[a];
        const double rho = kPi * r / (2.0 * spec.L);
        double wa = radial.weights[a] * r * spec.C_gamma;
        if (d == 3) wa *= r;
        if (spec.gamma != 0.0) wa *= std::pow(r, spec.gamma);

        for (int ax = 0; ax < d; ++ax) {
            for (int q = -2 * N; q <= 2 * N; ++q) {
                const std::size_t row =
                    (static_cast<std::size_t>(ax) * qa + (q + 2 * N)) * nb;
                for (std::size_t b = 0; b < nb; ++b) {
                    gphase[row + b] = std::polar(1.0, -rho * q * sph.nodes[b][ax]);
                    wphase[row + b] = std::polar(1.0, +rho * q * sph.nodes[b][ax]);
                }
            }
        }

        // T[q][b] = sum_j A_bj exp(+i rho q.w_j)
#pragma omp parallel for schedule(static)
        for (std::size_t qi = 0; qi < qcount; ++qi) {
            auto q = qbox.unflat(qi);
            std::vector<Complex> wvec(nb);
            for (std::size_t j = 0; j < nb; ++j) {
                Complex ph =
                    wphase[(0 * static_cast<std::size_t>(qa) + (q[0] + 2 * N)) * nb + j];
                for (int ax = 1; ax < d; ++ax)
                    ph *= wphase[(static_cast<std::size_t>(ax) * qa + (q[ax] + 2 * N)) * nb + j];
                wvec[j] = ph;
            }
            for (std::size_t b = 0; b < nb; ++b) {
                Complex acc{0.0, 0.0};
                const double* arow = amat.data() + b * nb;
                for (std::size_t j = 0; j < nb; ++j) acc += arow[j] * wvec[j];
                tmat[qi * nb + b] = acc;
            }
        }

        // beta(l,m) += wa sum_b s_b exp(-i rho (l+m).g_b) T[l-m][b]
#pragma omp parallel for schedule(dynamic, 8)
        for (std::size_t il = 0; il < count; ++il) {
            auto l = box.unflat(il);
            const std::size_t jl = box.flip(il);
            if (il > jl) continue;
            for (std::size_t im = 0; im < count; ++im) {
                const std::size_t jm = box.flip(im);
                if (il == jl && im > jm) continue;
                auto m = box.unflat(im);
                std::array<int, 3> qp{l[0] + m[0], l[1] + m[1], l[2] + m[2]};
                std::array<int, 3> qm{l[0] - m[0], l[1] - m[1], l[2] - m[2]};
                const Complex* trow = tmat.data() + qbox.flat(qm) * nb;
                Complex acc{0.0, 0.0};
                for (std::size_t b = 0; b < nb; ++b) {
                    Complex ph = gphase[(0 * static_cast<std::size_t>(qa) + (qp[0] + 2 * N)) * nb + b];
                    for (int ax = 1; ax < d; ++ax)
                        ph *= gphase[(static_cast<std::size_t>(ax) * qa + (qp[ax] + 2 * N)) * nb + b];
                    acc += sph.weights[b] * ph * trow[b];
                }
                beta[il * count + im] += wa * acc;
            }
        }
    }

    // conjugate half: beta(-l,-m) = conj(beta(l,m))
    for (std::size_t il = 0; il < count; ++il) {
        const std::size_t jl = box.flip(il);
        if (il > jl) continue;
        for (std::size_t im = 0; im < count; ++im) {
            const std::size_t jm = box.flip(im);
            if (il == jl && im > jm) continue;
            beta[jl * count + jm] = std::conj(beta[il * count + im]);
        }
    }
    return beta;
}

std::vector<Complex> build_fast_table(const KernelSpec& spec, int N,
                                      const QuadResolution& res) {
    if (spec.d != 2)
        throw std::invalid_argument("fast mode table requires d = 2");
    const ModeBox box{2, N};
    const std::size_t count = box.size();
    std::vector<Complex> beta(count * count, Complex{0.0, 0.0});

    Rule1D theta = periodic_uniform(even_up(res.angular), 2.0 * kPi);
    Rule1D rho = gauss_legendre(res.radial, 0.0, spec.R);
    Rule1D rhop = gauss_legendre(2 * res.radial, -spec.R, spec.R);
    const std::size_t ni = rho.nodes.size();
    const std::size_t nj = rhop.nodes.size();

    // weighted kernel density, invariant under rotation of the frame
    std::vector<double> kw(ni * nj);
    for (std::size_t i = 0; i < ni; ++i)
        for (std::size_t j = 0; j < nj; ++j)
            kw[i * nj + j] = rho.weights[i] * rhop.weights[j] *
                             eval_B_fast({rho.nodes[i], 0.0, 0.0},
                                         {0.0, rhop.nodes[j], 0.0}, spec);

    const double w = kPi / spec.L;
    std::vector<Complex> amat(count * ni), bmat(count * nj), cmat(count * nj);

    for (std::size_t t = 0; t < theta.nodes.size(); ++t) {
        const double c = std::cos(theta.nodes[t]);
        const double s = std::sin(theta.nodes[t]);
        const double wt = theta.weights[t];

#pragma omp parallel for schedule(static)
        for (std::size_t il = 0; il < count; ++il) {
            auto l = box.unflat(il);
            const double ul = w * (l[0] * c + l[1] * s);        // along e_theta
            const double um = w * (-l[0] * s + l[1] * c);       // along e_theta^perp
            for (std::size_t i = 0; i < ni; ++i)
                amat[il * ni + i] = std::polar(1.0, ul * rho.nodes[i]);
            for (std::size_t j = 0; j < nj; ++j)
                bmat[il * nj + j] = std::polar(1.0, um * rhop.nodes[j]);
            for (std::size_t j = 0; j < nj; ++j) {
                Complex acc{0.0, 0.0};
                for (std::size_t i = 0; i < ni; ++i)
                    acc += kw[i * nj + j] * amat[il * ni + i];
                cmat[il * nj + j] = acc;
            }
        }

#pragma omp parallel for schedule(dynamic, 8)
        for (std::size_t il = 0; il < count; ++il) {
            const std::size_t jl = box.flip(il);
            if (il > jl) continue;
            for (std::size_t im = 0; im < count; ++im) {
                const std::size_t jm = box.flip(im);
                if (il == jl && im > jm) continue;
                const Complex* crow = cmat.data() + il * nj;
                const Complex* brow = bmat.data() + im * nj;
                Complex acc{0.0, 0.0};
                for (std::size_t j = 0; j < nj; ++j) acc += crow[j] * brow[j];
                beta[il * count + im] += wt * acc;
            }
        }
    }

    for (std::size_t il = 0; il < count; ++il) {
        const std::size_t jl = box.flip(il);
        if (il > jl) continue;
        for (std::size_t im = 0; im < count; ++im) {
            const std::size_t jm = box.flip(im);
            if (il == jl && im > jm) continue;
            beta[jl * count + jm] = std::conj(beta[il * count + im]);
        }
    }
    return beta;
}

std::vector<Complex> extract_loss_diag(const std::vector<Complex>& beta, std::size_t count) {
    std::vector<Complex> diag(count);
    for (std::size_t i = 0; i < count; ++i) diag[i] = beta[i * count + i];
    return diag;
}

} // namespace

Complex beta_classical(const std::array<int, 3>& l, const std::array<int, 3>& m,
                       const KernelSpec& spec, const QuadResolution& res) {
    return beta_entry(l, m, spec, TruncationMethod::classical, res);
}

Complex beta_fast_direct(const std::array<int, 3>& l, const std::array<int, 3>& m,
                         const KernelSpec& spec, const QuadResolution& res) {
    return beta_entry(l, m, spec, TruncationMethod::fast, res);
}

CertifiedEntry beta_certified(const std::array<int, 3>& l, const std::array<int, 3>& m,
                              const KernelSpec& spec, TruncationMethod method,
                              QuadResolution start, double tol, int max_doublings) {
    Complex prev = beta_entry(l, m, spec, method, start);
    QuadResolution res = start;
    double delta = 0.0;
    for (int i = 0; i < max_doublings; ++i) {
        QuadResolution fine = res.doubled();
        Complex next = beta_entry(l, m, spec, method, fine);
        const double scale = beta_abs_scale(spec, method, fine);
        delta = std::abs(next - prev) / scale;
        if (delta <= tol)
            return CertifiedEntry{next, QuadMeta{fine, tol, delta, i + 1, false}};
        prev = next;
        res = fine;
    }
    std::ostringstream msg;
    msg << "kernel mode quadrature failed to certify at tol " << tol
        << "; last doubling delta " << delta << " (radial " << res.radial
        << ", angular " << res.angular << ")";
    throw NumericError(msg.str());
}

KernelModeTable::KernelModeTable(const KernelSpec& spec, int N, TruncationMethod method,
                                 std::vector<Complex> beta, QuadMeta meta)
    : spec_(spec), N_(N), method_(method), beta_(std::move(beta)), meta_(meta) {
    loss_diag_ = extract_loss_diag(beta_, mode_count());
}

std::vector<Complex> build_mode_table_raw(const KernelSpec& spec, int N,
                                          TruncationMethod method,
                                          const QuadResolution& res) {
    if (method == TruncationMethod::classical) return build_classical_table(spec, N, res);
    return build_fast_table(spec, N, res);
}

KernelModeTable precompute_table(const KernelSpec& spec, int N, TruncationMethod method,
                                 QuadResolution start, const PrecomputeOptions& opts) {
    spec.validate();
    const ModeBox box{spec.d, N};
    const std::size_t count = box.size();
    const std::uint64_t bytes = static_cast<std::uint64_t>(count) * count * 16;
    if (bytes > opts.max_bytes) {
        std::ostringstream msg;
        msg << "mode table would need " << bytes << " bytes (budget " << opts.max_bytes
            << "); use the fast path instead of a dense table";
        throw BudgetError(msg.str());
    }

    const std::size_t zero = box.flat({0, 0, 0});
    QuadResolution res = start;
    std::vector<Complex> coarse = build_mode_table_raw(spec, N, method, res);
    double delta = 0.0;

    if (spec.d == 2) {
        for (int i = 0; i < opts.max_doublings; ++i) {
            QuadResolution fine_res = res.doubled();
            std::vector<Complex> fine = build_mode_table_raw(spec, N, method, fine_res);
            const double scale = std::abs(fine[zero * count + zero]);
            delta = 0.0;
            for (std::size_t j = 0; j < fine.size(); ++j)
                delta = std::max(delta, std::abs(fine[j] - coarse[j]));
            delta /= scale;
            if (delta <= opts.tol)
                return KernelModeTable(spec, N, method, std::move(fine),
                                       QuadMeta{fine_res, opts.tol, delta, i + 1, false});
            coarse = std::move(fine);
            res = fine_res;
        }
    } else {
        // Full doubled rebuilds are out of reach in d=3; certify on a fixed
        // sampled pair set (extremes plus seeded random picks).
        std::vector<std::pair<std::size_t, std::size_t>> sample;
        sample.emplace_back(zero, zero);
        sample.emplace_back(box.flat({N, 0, 0}), zero);
        sample.emplace_back(box.flat({N, N, N}), box.flat({-N, N, -N}));
        sample.emplace_back(box.flat({1, 0, 0}), box.flat({1, 0, 0}));
        std::mt19937 rng(1234);
        std::uniform_int_distribution<std::size_t> pick(0, count - 1);
        for (int i = 0; i < 8; ++i) sample.emplace_back(pick(rng), pick(rng));

        for (int i = 0; i < opts.max_doublings; ++i) {
            QuadResolution fine_res = res.doubled();
            const double scale = std::abs(coarse[zero * count + zero]);
            delta = 0.0;
            for (auto [il, im] : sample) {
                Complex fine_v = beta_entry(box.unflat(il), box.unflat(im), spec,
                                            method, fine_res);
                delta = std::max(delta, std::abs(fine_v - coarse[il * count + im]));
            }
            delta /= scale;
            if (delta <= opts.tol)
                return KernelModeTable(spec, N, method, std::move(coarse),
                                       QuadMeta{res, opts.tol, delta, i, true});
            res = fine_res;
            coarse = build_mode_table_raw(spec, N, method, res);
        }
    }

    std::ostringstream msg;
    msg << "mode table failed to certify at tol " << opts.tol << "; last doubling delta "
        << delta << " (radial " << res.radial << ", angular " << res.angular << ")";
    throw NumericError(msg.str());
}

namespace {

void put_table_header(std::string& buf, const KernelSpec& spec, int N,
                      TruncationMethod method, const QuadResolution& res) {
    buf += "BKMT";
    io::put_u32(buf, 1u);
    io::put_u8(buf, method == TruncationMethod::classical ? 0 : 1);
    io::put_u32(buf, static_cast<std::uint32_t>(spec.d));
    io::put_u32(buf, static_cast<std::uint32_t>(N));
    io::put_f64(buf, spec.L);
    io::put_f64(buf, spec.R);
    io::put_f64(buf, spec.gamma);
    // a constant angular factor folds into the stored C_gamma
    io::put_f64(buf, spec.C_gamma * spec.angular.value);
    io::put_u32(buf, static_cast<std::uint32_t>(res.radial));
    io::put_u32(buf, static_cast<std::uint32_t>(res.angular));
}

} // namespace

void save_mode_table(const KernelModeTable& table, const std::string& path) {
    std::string buf;
    buf.reserve(49 + table.raw().size() * 16 + 4);
    put_table_header(buf, table.spec(), table.N(), table.method(), table.meta().res);
    for (const auto& c : table.raw()) {
        io::put_f64(buf, c.real());
        io::put_f64(buf, c.imag());
    }
    io::put_u32(buf, io::crc32(buf, buf.size()));
    io::write_file(path, buf);
}

KernelModeTable load_mode_table(const std::string& path) {
    const std::string buf = io::read_file(path);
    if (buf.size() < 4 + 4) throw CacheError("mode table file truncated: " + path);
    const std::uint32_t stored = io::crc32(buf, buf.size() - 4);
    io::Reader tail{buf, buf.size() - 4};
    if (tail.u32() != stored) throw CacheError("mode table CRC mismatch: " + path);

    io::Reader r{buf, 0};
    r.expect_magic("BKMT");
    if (r.u32() != 1u) throw CacheError("unsupported mode table version: " + path);
    const std::uint8_t tag = r.u8();
    if (tag > 1) throw CacheError("unknown truncation tag in " + path);
    KernelSpec spec;
    spec.d = static_cast<int>(r.u32());
    const int N = static_cast<int>(r.u32());
    spec.L = r.f64();
    spec.R = r.f64();
    spec.gamma = r.f64();
    spec.C_gamma = r.f64();
    QuadResolution res;
    res.radial = static_cast<int>(r.u32());
    res.angular = static_cast<int>(r.u32());

    if (spec.d < 2 || spec.d > 3 || N < 1)
        throw CacheError("mode table header invalid: " + path);
    const ModeBox box{spec.d, N};
    const std::size_t count = box.size();
    std::vector<Complex> beta(count * count);
    for (auto& c : beta) {
        const double re = r.f64();
        const double im = r.f64();
        c = Complex{re, im};
    }
    if (r.off + 4 != buf.size()) throw CacheError("mode table trailing bytes: " + path);

    TruncationMethod method = tag == 0 ? TruncationMethod::classical : TruncationMethod::fast;
    return KernelModeTable(spec, N, method, std::move(beta),
                           QuadMeta{res, 0.0, 0.0, 0, false});
}

KernelModeTable load_mode_table_checked(const std::string& path, const KernelSpec& spec,
                                        int N, TruncationMethod method) {
    KernelModeTable t = load_mode_table(path);
    const KernelSpec& s = t.spec();
    const bool match = s.d == spec.d && t.N() == N && t.method() == method &&
                       s.L == spec.L && s.R == spec.R && s.gamma == spec.gamma &&
                       s.C_gamma == spec.C_gamma * spec.angular.value;
    if (!match)
        throw CacheError("stale mode table (header does not match requested spec): " + path);
    return t;
}

std::uint64_t mode_table_key_hash(const KernelSpec& spec, int N, TruncationMethod method,
                                  const QuadResolution& res) {
    std::string buf;
    put_table_header(buf, spec, N, method, res);
    std::uint64_t h = 1469598103934665603ull;   // FNV-1a
    for (unsigned char c : buf) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

DecoupledWeights::DecoupledWeights(const KernelSpec& spec, int N, int M)
    : spec_(spec), N_(N), M_(M) {
    if (M < 1) throw std::invalid_argument("decoupled weights: M must be >= 1");
    if (spec.d == 3)
        throw std::invalid_argument(
            "decoupled weights: d = 3 fast path not implemented (use the classical table)");
    if (!spec.separable())
        throw std::invalid_argument(
            "decoupled weights: kernel not in the separable family (d=2 gamma=0)");
    kernel_const_ = std::pow(2.0, spec.d - 1) * spec.C_gamma * spec.angular.value;
    dir_cos_.resize(M);
    dir_sin_.resize(M);
    for (int p = 0; p < M; ++p) {
        const double th = 2.0 * kPi * p / M;
        dir_cos_[p] = std::cos(th);
        dir_sin_[p] = std::sin(th);
    }
    const ModeBox box{2, N};
    loss_diag_.assign(box.size(), Complex{0.0, 0.0});
    for (std::size_t i = 0; i < box.size(); ++i) {
        auto k = box.unflat(i);
        Complex acc{0.0, 0.0};
        for (int p = 0; p < M; ++p) acc += alpha(p, k) * alpha_prime(p, k);
        loss_diag_[i] = theta_weight() * acc;
    }
}

double DecoupledWeights::theta_weight() const { return 2.0 * kPi / M_; }

Complex DecoupledWeights::alpha(int p, const std::array<int, 3>& l) const {
    const double s = (kPi / spec_.L) * (l[0] * dir_cos_[p] + l[1] * dir_sin_[p]);
    return kernel_const_ * spec_.R * cexp_ratio(s * spec_.R);
}

Complex DecoupledWeights::alpha_prime(int p, const std::array<int, 3>& m) const {
    const double t = (kPi / spec_.L) * (-m[0] * dir_sin_[p] + m[1] * dir_cos_[p]);
    return Complex{2.0 * spec_.R * sinc(t * spec_.R), 0.0};
}

void DecoupledWeights::fill_alpha(int p, std::vector<Complex>& out) const {
    const ModeBox box{2, N_};
    out.resize(box.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha(p, box.unflat(i));
}

void DecoupledWeights::fill_alpha_prime(int p, std::vector<Complex>& out) const {
    const ModeBox box{2, N_};
    out.resize(box.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha_prime(p, box.unflat(i));
}

Complex DecoupledWeights::reconstruct(const std::array<int, 3>& l,
                                      const std::array<int, 3>& m) const {
    Complex acc{0.0, 0.0};
    for (int p = 0; p < M_; ++p) acc += alpha(p, l) * alpha_prime(p, m);
    return theta_weight() * acc;
}

double DecoupledWeights::beta00() const {
    return reconstruct({0, 0, 0}, {0, 0, 0}).real();
}

DecoupledWeights decoupled_weights(const KernelSpec& spec, int N, int M) {
    return DecoupledWeights(spec, N, M);
}

} // namespace bspec
