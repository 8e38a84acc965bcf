#include "bspec/dynamics.hpp"

#include "bspec/errors.hpp"
#include "bspec/io_util.hpp"

#include <cmath>
#include <sstream>

namespace bspec {

TimeScheme parse_scheme(const std::string& name) {
    if (name == "euler") return TimeScheme::euler;
    if (name == "rk2") return TimeScheme::rk2;
    if (name == "rk4") return TimeScheme::rk4;
    throw ConfigError("time.scheme must be euler, rk2 or rk4 (got '" + name + "')");
}

std::string scheme_name(TimeScheme s) {
    switch (s) {
        case TimeScheme::euler: return "euler";
        case TimeScheme::rk2: return "rk2";
        default: return "rk4";
    }
}

SpectralField build_initial(const InitialSpec& init, const TorusGrid& grid,
                            std::vector<std::string>* warnings) {
    if (init.bumps.empty())
        throw std::invalid_argument("initial data needs at least one bump");
    double wsum = 0.0;
    for (const auto& b : init.bumps) {
        if (!(b.weight > 0.0))
            throw std::invalid_argument("initial bump weights must be positive");
        if (!(b.temperature > 0.0))
            throw std::invalid_argument("initial bump temperatures must be positive");
        wsum += b.weight;
    }
    if (!(wsum > 0.0)) throw std::invalid_argument("initial data has zero total weight");
    if (!(init.mass > 0.0)) throw std::invalid_argument("initial.mass must be positive");

    const int n = grid.n_phys;
    std::vector<double> values(grid.phys_count(), 0.0);
    double inside = 0.0, outside = 0.0;
    // collisions of data supported in this ball stay inside the box when
    // R >= sqrt(2) L
    const double safe = 2.0 * grid.L / (3.0 + std::sqrt(2.0));

    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        std::array<double, 3> v{0.0, 0.0, 0.0};
        std::size_t rem = flat;
        for (int ax = grid.d - 1; ax >= 0; --ax) {
            idx[ax] = static_cast<int>(rem % n);
            rem /= n;
        }
        double r2 = 0.0;
        for (int ax = 0; ax < grid.d; ++ax) {
            v[ax] = grid.node(idx[ax]);
            r2 += v[ax] * v[ax];
        }
        double val = 0.0;
        for (const auto& b : init.bumps) {
            double d2 = 0.0;
            for (int ax = 0; ax < grid.d; ++ax) {
                const double dv = v[ax] - b.center[ax];
                d2 += dv * dv;
            }
            val += b.weight * std::exp(-d2 / (2.0 * b.temperature));
        }
        values[flat] = val;
        (r2 <= safe * safe ? inside : outside) += val;
    }

    if (warnings && outside > 1e-10 * (inside + outside)) {
        std::ostringstream msg;
        msg << "initial data carries mass fraction " << outside / (inside + outside)
            << " outside the dealiasing-safe ball |v| <= " << safe;
        warnings->push_back(msg.str());
    }

    SpectralField f = forward_transform(values, grid);
    const double mass = f.mass();
    if (!(mass > 0.0)) throw NumericError("initial data has nonpositive sampled mass");
    f *= init.mass / mass;
    f.symmetrize_hermitian();
    return f;
}

double max_stable_dt(const SpectralField& f, const CollisionOperator& op, double safety) {
    const double rate = op.beta00() * f.l1_coeff_norm();
    if (!(rate > 0.0)) return 1e30;
    return safety / rate;
}

namespace {

SpectralField rhs(const CollisionOperator& op, const SpectralField& f) {
    return op.full(f);
}

} // namespace

SimulationState step(const SimulationState& state, double dt, const CollisionOperator& op,
                     TimeScheme scheme, bool force_dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    const double bound = max_stable_dt(state.field, op);
    if (dt > bound && !force_dt) {
        std::ostringstream msg;
        msg << "dt=" << dt << " exceeds the stability bound " << bound
            << " (loss rate beta00*|f|_1); pass force to override";
        throw std::invalid_argument(msg.str());
    }

    const SpectralField& f = state.field;
    SpectralField next = f;
    switch (scheme) {
        case TimeScheme::euler: {
            next += dt * rhs(op, f);
            break;
        }
        case TimeScheme::rk2: {
            SpectralField k1 = rhs(op, f);
            SpectralField mid = f + (0.5 * dt) * k1;
            next += dt * rhs(op, mid);
            break;
        }
        case TimeScheme::rk4: {
            SpectralField k1 = rhs(op, f);
            SpectralField k2 = rhs(op, f + (0.5 * dt) * k1);
            SpectralField k3 = rhs(op, f + (0.5 * dt) * k2);
            SpectralField k4 = rhs(op, f + dt * k3);
            k1 += 2.0 * k2;
            k1 += 2.0 * k3;
            k1 += k4;
            next += (dt / 6.0) * k1;
            break;
        }
    }
    next.symmetrize_hermitian();
    return SimulationState{state.t + dt, std::move(next), state.step_count + 1};
}

void run_simulation(SimulationState state, const CollisionOperator& op,
                    const RunOptions& opts,
                    const std::function<void(const SimulationState&)>& on_diagnostics,
                    const std::function<void(const SimulationState&)>& on_abort) {
    if (opts.t_end < state.t) throw std::invalid_argument("run: t_end before start time");

    double dt = opts.dt > 0.0 ? opts.dt
                              : max_stable_dt(state.field, op, opts.cfl_safety);
    if (on_diagnostics) on_diagnostics(state);
    if (opts.t_end == state.t) return;

    SimulationState last_good = state;
    while (state.t < opts.t_end - 1e-14 * std::max(1.0, opts.t_end)) {
        const double step_dt = std::min(dt, opts.t_end - state.t);
        SimulationState next = step(state, step_dt, op, opts.scheme, opts.force_dt);

        bool finite = true;
        for (const auto& c : next.field.data())
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) finite = false;
        if (!finite) {
            if (on_abort) on_abort(last_good);
            std::ostringstream msg;
            msg << "field became non-finite at t=" << next.t << " (step "
                << next.step_count << ")";
            throw NumericError(msg.str());
        }
        state = std::move(next);
        last_good = state;
        if (on_diagnostics &&
            (state.step_count % opts.cadence == 0 ||
             state.t >= opts.t_end - 1e-14 * std::max(1.0, opts.t_end)))
            on_diagnostics(state);
    }
}

void save_snapshot(const SimulationState& state, const KernelSpec& spec,
                   const std::string& path) {
    const TorusGrid& g = state.field.grid();
    std::string buf;
    buf.reserve(44 + state.field.size() * 16 + 4);
    buf += "BSPC";
    io::put_u32(buf, 1u);
    io::put_u32(buf, static_cast<std::uint32_t>(g.d));
    io::put_u32(buf, static_cast<std::uint32_t>(g.N));
    io::put_f64(buf, g.L);
    io::put_f64(buf, spec.R);
    io::put_f64(buf, state.t);
    for (const auto& c : state.field.data()) {
        io::put_f64(buf, c.real());
        io::put_f64(buf, c.imag());
    }
    io::put_u32(buf, io::crc32(buf, buf.size()));
    io::write_file(path, buf);
}

SimulationState load_snapshot(const std::string& path, double* R_out) {
    const std::string buf = io::read_file(path);
    if (buf.size() < 8) throw CacheError("snapshot truncated: " + path);
    const std::uint32_t stored = io::crc32(buf, buf.size() - 4);
    io::Reader tail{buf, buf.size() - 4};
    if (tail.u32() != stored) throw CacheError("snapshot CRC mismatch: " + path);

    io::Reader r{buf, 0};
    r.expect_magic("BSPC");
    if (r.u32() != 1u) throw CacheError("unsupported snapshot version: " + path);
    const int d = static_cast<int>(r.u32());
    const int N = static_cast<int>(r.u32());
    const double L = r.f64();
    const double R = r.f64();
    const double t = r.f64();
    if (d < 2 || d > 3)
        throw CacheError("snapshot has unsupported dimension d=" + std::to_string(d) +
                         ": " + path);
    if (N < 1 || !(L > 0.0)) throw CacheError("snapshot header invalid: " + path);

    SpectralField f(TorusGrid::make(d, N, L));
    for (auto& c : f.data()) {
        const double re = r.f64();
        const double im = r.f64();
        c = Complex{re, im};
    }
    if (r.off + 4 != buf.size()) throw CacheError("snapshot trailing bytes: " + path);
    if (R_out) *R_out = R;
    return SimulationState{t, std::move(f), 0};
}

} // namespace bspec
