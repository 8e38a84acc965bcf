#include "bspec/analysis.hpp"

#include "bspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace bspec {

namespace {

constexpr double kPi = std::numbers::pi;

struct SpectrumAccum {
    std::vector<Complex> a_direct;
    std::vector<Complex> combo;
    double beta00 = 0.0;
};

// Dense path: one node sweep per mode; handles both truncations at any
// gamma, cost modes x nodes.
SpectrumAccum spectrum_dense(const KernelSpec& spec, int N, TruncationMethod method,
                             const QuadResolution& res) {
    const ModeBox box{spec.d, N};
    const std::size_t count = box.size();
    SpectrumAccum out;
    out.a_direct.assign(count, Complex{0.0, 0.0});
    out.combo.assign(count, Complex{0.0, 0.0});
    const double w = kPi / spec.L;

    std::vector<CollisionNode> nodes;
    for_each_collision_node(spec, method, res,
                            [&](const CollisionNode& n) { nodes.push_back(n); });
    for (const auto& n : nodes) out.beta00 += n.weight;

#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < count; ++i) {
        auto k = box.unflat(i);
        Complex a{0.0, 0.0}, b0k{0.0, 0.0}, bk0{0.0, 0.0}, bkk{0.0, 0.0};
        for (const auto& n : nodes) {
            double ph1 = 0.0, ph2 = 0.0, phs = 0.0;
            for (int ax = 0; ax < spec.d; ++ax) {
                ph1 += k[ax] * n.post[ax];
                ph2 += k[ax] * n.post_star[ax];
                phs += k[ax] * n.star[ax];
            }
            const Complex p1 = std::polar(1.0, w * ph1);
            const Complex p2 = std::polar(1.0, w * ph2);
            const Complex ps = std::polar(1.0, w * phs);
            a += n.weight * (p1 + p2 - ps - Complex{1.0, 0.0});
            bk0 += n.weight * p1;
            b0k += n.weight * p2;
            bkk += n.weight * (p1 * p2);
        }
        out.a_direct[i] = a;
        out.combo[i] = b0k + bk0 - bkk - out.beta00;
    }
    return out;
}

// Separable fast-truncation path: per direction the radial mode sums
// factor, so the sweep is modes x directions x radial nodes.
SpectrumAccum spectrum_fast_separable(const KernelSpec& spec, int N,
                                      const QuadResolution& res) {
    const ModeBox box{2, N};
    const std::size_t count = box.size();
    SpectrumAccum out;
    out.a_direct.assign(count, Complex{0.0, 0.0});
    out.combo.assign(count, Complex{0.0, 0.0});

    Rule1D theta = periodic_uniform(even_up(res.angular), 2.0 * kPi);
    Rule1D rho = gauss_legendre(res.radial, 0.0, spec.R);
    Rule1D rhop = gauss_legendre(2 * res.radial, -spec.R, spec.R);
    const double K = std::pow(2.0, spec.d - 1) * spec.C_gamma * spec.angular.value;
    const double w = kPi / spec.L;

    double s_rho = 0.0, s_rhop = 0.0;
    for (double x : rho.weights) s_rho += x;
    for (double x : rhop.weights) s_rhop += x;
    double wt_sum = 0.0;
    for (double x : theta.weights) wt_sum += x;
    out.beta00 = K * wt_sum * s_rho * s_rhop;

#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < count; ++i) {
        auto k = box.unflat(i);
        Complex a{0.0, 0.0}, b0k{0.0, 0.0}, bk0{0.0, 0.0}, bkk{0.0, 0.0};
        for (std::size_t t = 0; t < theta.nodes.size(); ++t) {
            const double c = std::cos(theta.nodes[t]);
            const double s = std::sin(theta.nodes[t]);
            const double sk = w * (k[0] * c + k[1] * s);
            const double tk = w * (-k[0] * s + k[1] * c);
            Complex P{0.0, 0.0}, Q{0.0, 0.0};
            for (std::size_t r = 0; r < rho.nodes.size(); ++r)
                P += rho.weights[r] * std::polar(1.0, sk * rho.nodes[r]);
            for (std::size_t r = 0; r < rhop.nodes.size(); ++r)
                Q += rhop.weights[r] * std::polar(1.0, tk * rhop.nodes[r]);
            const double wk = theta.weights[t] * K;
            a += wk * (P * s_rhop + s_rho * Q - P * Q - s_rho * s_rhop);
            bk0 += wk * P * s_rhop;
            b0k += wk * s_rho * Q;
            bkk += wk * P * Q;
        }
        out.a_direct[i] = a;
        out.combo[i] = b0k + bk0 - bkk - out.beta00;
    }
    return out;
}

} // namespace

LinearSpectrum eigenvalues(const KernelSpec& spec, int N, TruncationMethod method,
                           const EigenOptions& opts) {
    spec.validate();
    QuadResolution res = opts.res;
    if (res.radial == 0) res = default_resolution(N);

    SpectrumAccum acc;
    if (method == TruncationMethod::fast && spec.separable() && spec.d == 2) {
        acc = spectrum_fast_separable(spec, N, res);
    } else {
        const ModeBox box{spec.d, N};
        const double cost = static_cast<double>(box.size()) *
                            static_cast<double>(collision_node_count(spec, method, res));
        if (cost > opts.cost_budget && !opts.force) {
            std::ostringstream msg;
            msg << "dense spectrum sweep cost " << cost << " exceeds budget "
                << opts.cost_budget;
            throw BudgetError(msg.str());
        }
        acc = spectrum_dense(spec, N, method, res);
    }

    LinearSpectrum sp;
    sp.spec = spec;
    sp.method = method;
    sp.N = N;
    sp.a_inf = -acc.beta00;
    sp.a.resize(acc.a_direct.size());
    const double scale = std::abs(sp.a_inf);
    for (std::size_t i = 0; i < acc.a_direct.size(); ++i) {
        sp.a[i] = acc.a_direct[i].real();
        sp.max_imag = std::max(sp.max_imag, std::abs(acc.a_direct[i].imag()));
        sp.max_cross_delta =
            std::max(sp.max_cross_delta, std::abs(acc.a_direct[i] - acc.combo[i]));
    }
    if (sp.max_cross_delta > opts.cross_tol * scale) {
        std::ostringstream msg;
        msg << "linearized spectrum cross-identity violated: |a_k - (beta combination)| = "
            << sp.max_cross_delta << " vs tolerance " << opts.cross_tol * scale
            << "; mode sign convention is inconsistent";
        throw NumericError(msg.str());
    }

    SpectralGap gap = spectral_gap(sp);
    sp.lambda = gap.lambda;
    sp.argmin = gap.argmin;
    return sp;
}

SpectralGap spectral_gap(const LinearSpectrum& spectrum) {
    const ModeBox box{spectrum.spec.d, spectrum.N};
    SpectralGap gap;
    gap.trend.assign(spectrum.N, 0.0);
    for (int Np = 1; Np <= spectrum.N; ++Np) {
        double best = 0.0;
        std::array<int, 3> arg{0, 0, 0};
        bool first = true;
        for (std::size_t i = 0; i < spectrum.a.size(); ++i) {
            auto k = box.unflat(i);
            bool zero = true, inside = true;
            for (int ax = 0; ax < spectrum.spec.d; ++ax) {
                if (k[ax] != 0) zero = false;
                if (std::abs(k[ax]) > Np) inside = false;
            }
            if (zero || !inside) continue;
            const double v = std::abs(spectrum.a[i]);
            if (first || v < best) {
                best = v;
                arg = k;
                first = false;
            }
        }
        gap.trend[Np - 1] = best;
        if (Np == spectrum.N) {
            gap.lambda = best;
            gap.argmin = arg;
        }
    }
    return gap;
}

SpreadingConstants mu0(double R, double L) {
    if (!(R > 0.0) || !(L > 0.0)) throw std::invalid_argument("mu0: R, L must be positive");
    SpreadingConstants c;
    c.y0 = R / (2.0 * std::sqrt(2.0) * L);
    if (c.y0 > 1.0 / std::sqrt(2.0) + 1e-12)
        throw std::invalid_argument("mu0: R/(2 sqrt(2) L) beyond 1/sqrt(2); "
                                    "the increasing-branch formula does not apply");
    c.mu0 = std::sqrt(std::max(0.0, 1.0 - c.y0 * c.y0)) + c.y0;
    c.mu = 0.5 * (1.0 + c.mu0);
    return c;
}

namespace {

// C-infinity ramp: 0 at t<=0, 1 at t>=1.
double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

// Largest radius such that every grid point inside it stays above
// tol * max(values).
double positivity_radius(const std::vector<double>& values, const TorusGrid& grid,
                         double tol) {
    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, v);
    if (!(vmax > 0.0)) return 0.0;
    const double thr = tol * vmax;
    const int n = grid.n_phys;
    std::vector<std::pair<double, double>> pts;   // (|v|, value)
    pts.reserve(values.size());
    for (int j0 = 0; j0 < n; ++j0)
        for (int j1 = 0; j1 < n; ++j1) {
            const double x = grid.node(j0), y = grid.node(j1);
            pts.emplace_back(std::sqrt(x * x + y * y),
                             values[static_cast<std::size_t>(j0) * n + j1]);
        }
    std::sort(pts.begin(), pts.end());
    double radius = 0.0;
    for (const auto& [r, v] : pts) {
        if (v <= thr) break;
        radius = r;
    }
    return radius;
}

} // namespace

SpreadingReport check_spreading(double r, const KernelSpec& spec,
                                const SpreadingOptions& opts) {
    spec.validate();
    if (spec.d != 2) throw std::invalid_argument("check_spreading: d = 2 only");
    SpreadingReport rep;
    rep.r = r;
    if (!(r > 0.0)) throw std::invalid_argument("check_spreading: r must be positive");
    if (r >= std::sqrt(2.0) * spec.L) {
        rep.skipped = true;
        rep.pass = true;
        rep.note = "indicator already covers the torus; nothing to check";
        return rep;
    }

    const SpreadingConstants c = mu0(spec.R, spec.L);
    rep.mu = c.mu;

    TorusGrid grid = TorusGrid::make(2, 1, spec.L, opts.grid_n);
    const double h = grid.cell();
    const double moll = 2.0 * h;
    if (moll >= r / 4.0)
        throw std::invalid_argument("check_spreading: grid too coarse, mollification "
                                    "width >= r/4");

    const int n = grid.n_phys;
    std::vector<double> chi(grid.phys_count());
    for (int j0 = 0; j0 < n; ++j0)
        for (int j1 = 0; j1 < n; ++j1) {
            const double x = grid.node(j0), y = grid.node(j1);
            const double rad = std::sqrt(x * x + y * y);
            chi[static_cast<std::size_t>(j0) * n + j1] = smooth_step((r - rad) / moll);
        }

    PhysicalEvalOptions pe;
    pe.method = TruncationMethod::classical;
    pe.res = opts.res;
    pe.part = CollisionPart::gain;
    std::vector<double> gain = collision_physical(chi, grid, spec, pe);

    double min_inner = 1e300;
    for (int j0 = 0; j0 < n; ++j0)
        for (int j1 = 0; j1 < n; ++j1) {
            const double x = grid.node(j0), y = grid.node(j1);
            if (std::sqrt(x * x + y * y) <= c.mu * r)
                min_inner = std::min(min_inner,
                                     gain[static_cast<std::size_t>(j0) * n + j1]);
        }
    rep.min_inner = min_inner;
    rep.pass = min_inner > 0.0;
    rep.radius_one = positivity_radius(gain, grid, opts.positivity_tol);

    // second application on the normalized gain
    double gmax = 0.0;
    for (double v : gain) gmax = std::max(gmax, v);
    if (gmax > 0.0) {
        std::vector<double> g1(gain);
        for (auto& v : g1) v = std::max(0.0, v / gmax);
        std::vector<double> gain2 = collision_physical(g1, grid, spec, pe);
        rep.radius_two = positivity_radius(gain2, grid, opts.positivity_tol);
    }
    return rep;
}

RelaxationFit fit_relaxation(const std::vector<std::pair<double, double>>& series) {
    std::vector<std::pair<double, double>> rows;
    for (const auto& [t, l2] : series)
        if (l2 > 1e-12) rows.emplace_back(t, std::log(l2));
    if (rows.size() < 10)
        throw std::invalid_argument("fit_relaxation: need at least 10 usable rows");

    // tail window: the later half, at least 10 rows
    const std::size_t keep = std::max<std::size_t>(10, rows.size() / 2);
    const std::size_t start = rows.size() - keep;

    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, syy = 0.0;
    const double count = static_cast<double>(keep);
    for (std::size_t i = start; i < rows.size(); ++i) {
        st += rows[i].first;
        sy += rows[i].second;
        stt += rows[i].first * rows[i].first;
        sty += rows[i].first * rows[i].second;
        syy += rows[i].second * rows[i].second;
    }
    const double denom = count * stt - st * st;
    if (!(std::abs(denom) > 0.0))
        throw std::invalid_argument("fit_relaxation: degenerate time column");
    const double slope = (count * sty - st * sy) / denom;
    if (slope >= 0.0) throw NumericError("fit_relaxation: trajectory is not decaying");

    RelaxationFit fit;
    fit.rate = -slope;
    fit.rows_used = static_cast<int>(keep);
    const double ss_tot = syy - sy * sy / count;
    const double ss_res = ss_tot - slope * (sty - st * sy / count);
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

std::vector<std::pair<double, double>> read_l2_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CacheError("cannot open CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw CacheError("empty CSV: " + path);

    // l2_to_eq is the last column, t the first.
    std::vector<std::pair<double, double>> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t first_comma = line.find(',');
        const std::size_t last_comma = line.rfind(',');
        if (first_comma == std::string::npos || last_comma == first_comma) continue;
        out.emplace_back(std::stod(line.substr(0, first_comma)),
                         std::stod(line.substr(last_comma + 1)));
    }
    return out;
}

} // namespace bspec
