#pragma once

#include "bspec/collision.hpp"
#include "bspec/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bspec {

enum class TimeScheme { euler, rk2, rk4 };

TimeScheme parse_scheme(const std::string& name);
std::string scheme_name(TimeScheme s);

struct GaussianBump {
    double weight = 1.0;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double temperature = 1.0;
};

struct InitialSpec {
    std::vector<GaussianBump> bumps;
    double mass = 1.0;
};

struct SimulationState {
    double t = 0.0;
    SpectralField field;
    long step_count = 0;
};

// Samples the bump sum on the grid, transforms, and rescales so the mass is
// exact.  Appends a warning when a bump leaks outside the dealiasing-safe
// ball of radius 2L/(3+sqrt(2)).
SpectralField build_initial(const InitialSpec& init, const TorusGrid& grid,
                            std::vector<std::string>* warnings = nullptr);

// Stability bound of the explicit schemes: the loss rate is bounded by
// beta(0,0) sum_k |f̂_k|, so dt_max = safety / (beta00 * sum |f̂_k|).
double max_stable_dt(const SpectralField& f, const CollisionOperator& op,
                     double safety = 0.5);

// One explicit step of df/dt = P_N Q(f,f); refuses dt above the stability
// bound unless forced.  Mass mode untouched; Hermitian symmetry re-pinned.
SimulationState step(const SimulationState& state, double dt, const CollisionOperator& op,
                     TimeScheme scheme, bool force_dt = false);

struct RunOptions {
    double t_end = 1.0;
    double dt = 0.0;            // 0: derive from cfl_safety at t=0
    double cfl_safety = 0.5;
    TimeScheme scheme = TimeScheme::rk4;
    int cadence = 20;           // steps between diagnostic callbacks
    bool force_dt = false;
};

// Integrates to t_end, invoking on_diagnostics(state) at t=0, every cadence
// steps, and at the end.  Aborts with NumericError on NaN/overflow after
// handing the last good state to on_abort.
void run_simulation(SimulationState state, const CollisionOperator& op,
                    const RunOptions& opts,
                    const std::function<void(const SimulationState&)>& on_diagnostics,
                    const std::function<void(const SimulationState&)>& on_abort = {});

// Snapshot file ("BSPC"), CRC-32 checked, bit-exact round trip.
void save_snapshot(const SimulationState& state, const KernelSpec& spec,
                   const std::string& path);
SimulationState load_snapshot(const std::string& path, double* R_out = nullptr);

} // namespace bspec
