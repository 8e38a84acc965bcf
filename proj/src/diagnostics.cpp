#include "bspec/diagnostics.hpp"

#include "bspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

namespace bspec {

namespace {

// Closed trapezoid weights over [0..n]: h/2 at both ends, h inside.  Values
// are read with periodic wrap; the coordinate at node n is +L, so odd
// factors like v f cancel exactly for symmetric fields.
template <typename F>
void for_each_closed_node(const TorusGrid& g, const std::vector<double>& values, F&& fn) {
    const int n = g.n_phys;
    const double h = g.cell();
    std::array<int, 3> j{0, 0, 0};
    const int jmax = n + 1;
    std::size_t count = 1;
    for (int ax = 0; ax < g.d; ++ax) count *= static_cast<std::size_t>(jmax);
    for (std::size_t flat = 0; flat < count; ++flat) {
        std::size_t rem = flat;
        for (int ax = g.d - 1; ax >= 0; --ax) {
            j[ax] = static_cast<int>(rem % jmax);
            rem /= jmax;
        }
        double w = 1.0;
        std::array<double, 3> v{0.0, 0.0, 0.0};
        std::size_t src = 0;
        for (int ax = 0; ax < g.d; ++ax) {
            w *= (j[ax] == 0 || j[ax] == n) ? 0.5 * h : h;
            v[ax] = -g.L + 2.0 * g.L * j[ax] / n;
            src = src * n + static_cast<std::size_t>(j[ax] % n);
        }
        fn(v, w, values[src]);
    }
}

} // namespace

Moments moments(const SpectralField& field) {
    const TorusGrid& g = field.grid();
    Moments m;
    m.rho = field.mass();
    if (!(m.rho > 0.0)) {
        m.valid = false;
        return m;
    }
    std::vector<double> values = inverse_transform(field);
    std::array<double, 3> I1{0.0, 0.0, 0.0};
    double I2 = 0.0;
    for_each_closed_node(g, values, [&](const std::array<double, 3>& v, double w, double fv) {
        double r2 = 0.0;
        for (int ax = 0; ax < g.d; ++ax) {
            I1[ax] += w * v[ax] * fv;
            r2 += v[ax] * v[ax];
        }
        I2 += w * r2 * fv;
    });
    double u2 = 0.0;
    for (int ax = 0; ax < g.d; ++ax) {
        m.u[ax] = I1[ax] / m.rho;
        u2 += m.u[ax] * m.u[ax];
    }
    m.T = (I2 - m.rho * u2) / (g.d * m.rho);
    return m;
}

EntropyResult entropy(const SpectralField& field, double floor) {
    if (!(floor > 0.0)) throw std::invalid_argument("entropy: floor must be positive");
    const TorusGrid& g = field.grid();
    std::vector<double> values = inverse_transform(field);
    const double cell = std::pow(g.cell(), g.d);
    double H = 0.0;
    std::size_t clipped = 0;
    for (double v : values) {
        if (v < floor) {
            ++clipped;
            v = floor;
        }
        H += v * std::log(v);
    }
    return EntropyResult{H * cell, static_cast<double>(clipped) / values.size()};
}

EntropyResult relative_entropy(const SpectralField& field, double floor) {
    if (!(floor > 0.0)) throw std::invalid_argument("relative_entropy: floor must be positive");
    const TorusGrid& g = field.grid();
    const double m_inf = field.mass() / g.volume();
    if (!(m_inf > 0.0)) throw NumericError("relative_entropy: nonpositive mass");
    std::vector<double> values = inverse_transform(field);
    const double cell = std::pow(g.cell(), g.d);
    double H = 0.0;
    std::size_t clipped = 0;
    for (double v : values) {
        if (v < floor) {
            ++clipped;
            v = floor;
        }
        H += v * std::log(v / m_inf);
    }
    return EntropyResult{H * cell, static_cast<double>(clipped) / values.size()};
}

NegativePart negative_part(const SpectralField& field) {
    const TorusGrid& g = field.grid();
    std::vector<double> values = inverse_transform(field);
    const double cell = std::pow(g.cell(), g.d);
    NegativePart np;
    for (double v : values) {
        if (v < 0.0) {
            np.linf = std::max(np.linf, -v);
            np.l1 += -v * cell;
        }
    }
    return np;
}

EntropyProductionResult entropy_production(const SpectralField& field,
                                           const KernelSpec& spec,
                                           const EntropyProductionOptions& opts) {
    if (spec.d != 2 || field.grid().d != 2)
        throw std::invalid_argument("entropy_production: d = 2 only");

    const TorusGrid& fg = field.grid();
    const int n = opts.grid_n > 0 ? opts.grid_n : fg.n_phys;
    if (n < fg.modes_per_axis())
        throw std::invalid_argument("entropy_production: diagnostic grid too coarse");
    TorusGrid g = TorusGrid::make(2, fg.N, fg.L, n);

    QuadResolution res = opts.res;
    if (res.radial == 0) {
        QuadResolution full = default_resolution(fg.N);
        res = {std::max(4, full.radial / 2), std::max(6, full.angular / 2)};
    }

    const double nodes =
        static_cast<double>(collision_node_count(spec, TruncationMethod::classical, res));
    const double cost = nodes * static_cast<double>(g.phys_count());
    if (cost > opts.cost_budget && !opts.force) {
        std::ostringstream msg;
        msg << "entropy production cost " << cost << " exceeds budget " << opts.cost_budget;
        throw BudgetError(msg.str());
    }

    const double m_inf = field.mass() / g.volume();
    const double floor = opts.floor_rel * m_inf;
    if (!(floor > 0.0)) throw NumericError("entropy_production: nonpositive mass");

    std::vector<double> values = inverse_transform(field, n);
    std::size_t clipped = 0;
    for (auto& v : values) {
        if (v < floor) {
            ++clipped;
            v = floor;
        }
    }
    EntropyProductionResult out;
    out.clipped_fraction = static_cast<double>(clipped) / values.size();
    if (out.clipped_fraction > opts.max_clipped) {
        std::ostringstream msg;
        msg << "clipped fraction " << out.clipped_fraction << " above "
            << opts.max_clipped << "; field not positive enough for log products";
        out.reason = msg.str();
        return out;
    }

    ShiftedEvaluator ev(values, g);
    const double cell = std::pow(g.cell(), 2);
    const std::size_t total = g.phys_count();
    std::vector<double> fpost, fpost_star, fstar;
    double D = 0.0;

    for_each_collision_node(spec, TruncationMethod::classical, res,
                            [&](const CollisionNode& node) {
        if (node.weight == 0.0) return;
        ev.shift(node.post, fpost);
        ev.shift(node.post_star, fpost_star);
        ev.shift(node.star, fstar);
        double acc = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            const double fp = std::max(fpost[i], floor);
            const double fps = std::max(fpost_star[i], floor);
            const double fs = std::max(fstar[i], floor);
            const double gain = fp * fps;
            const double lose = values[i] * fs;
            acc += (gain - lose) * (std::log(gain) - std::log(lose));
        }
        D += 0.25 * node.weight * acc * cell;
    });

    out.computed = true;
    out.value = D;
    return out;
}

double consistency_norm(const SpectralField& f_ref, double p, const CollisionOperator& op) {
    const int N = op.N();
    if (f_ref.grid().N < N)
        throw std::invalid_argument("consistency_norm: reference field coarser than N");
    SpectralField fN = project(f_ref, N);
    SpectralField Q = op.full_extended(fN);

    const TorusGrid& g = Q.grid();
    const double scale = 3.14159265358979323846 / g.L;
    ModeBox mb = Q.box();
    double s = 0.0;
    for (std::size_t i = 0; i < Q.size(); ++i) {
        auto k = mb.unflat(i);
        int kinf = 0;
        double k2 = 0.0;
        for (int ax = 0; ax < g.d; ++ax) {
            kinf = std::max(kinf, std::abs(k[ax]));
            k2 += static_cast<double>(k[ax]) * k[ax];
        }
        if (kinf <= N) continue;
        const double w = (p == 0.0) ? 1.0 : std::pow(1.0 + scale * scale * k2, p);
        s += w * std::norm(Q[i]);
    }
    return std::sqrt(g.volume() * s);
}

DiagnosticsRecord compute_record(double t, const SpectralField& field,
                                 double entropy_floor_rel, double sobolev_p) {
    DiagnosticsRecord rec;
    rec.t = t;
    Moments m = moments(field);
    rec.valid = m.valid;
    rec.mass = m.rho;
    rec.u = m.u;
    rec.T = m.T;
    if (m.valid) {
        const double m_inf = field.mass() / field.grid().volume();
        const double floor = entropy_floor_rel * m_inf;
        EntropyResult h = entropy(field, floor);
        EntropyResult hrel = relative_entropy(field, floor);
        rec.H = h.value;
        rec.H_rel = hrel.value;
        rec.clipped_fraction = h.clipped_fraction;
    }
    NegativePart np = negative_part(field);
    rec.neg_inf = np.linf;
    rec.neg_l1 = np.l1;
    rec.l2_to_eq = l2_distance_to_equilibrium(field);
    rec.sobolev = sobolev_norm(field, sobolev_p);
    return rec;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string csv_header(int d) {
    std::string h = "t,mass";
    for (int i = 1; i <= d; ++i) h += ",u" + std::to_string(i);
    h += ",T,H,H_rel,D,neg_inf,negL1,l2_to_eq";
    return h;
}

std::string csv_row(const DiagnosticsRecord& rec, int d) {
    std::string row = fmt(rec.t) + "," + fmt(rec.mass);
    for (int i = 0; i < d; ++i) row += "," + fmt(rec.u[i]);
    row += "," + fmt(rec.T) + "," + fmt(rec.H) + "," + fmt(rec.H_rel) + ",";
    if (rec.D) row += fmt(*rec.D);
    row += "," + fmt(rec.neg_inf) + "," + fmt(rec.neg_l1) + "," + fmt(rec.l2_to_eq);
    return row;
}

} // namespace bspec
