#pragma once

#include "bspec/collision_nodes.hpp"
#include "bspec/dynamics.hpp"
#include "bspec/grid.hpp"
#include "bspec/kernels.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bspec {

// Flat key = value configuration with section-prefixed keys.  Unknown keys
// are rejected; every constraint violation names the key.
struct Config {
    // domain
    int d = 2;
    int N = 8;
    double L = 3.141592653589793;
    int n_phys = 0;                  // 0: 2(2N+1)

    // kernel
    double gamma = 0.0;
    double C_gamma = 1.0;
    double R = 0.0;                  // 0: sqrt(2) L
    double angular_b = 1.0;
    bool allow_subcritical_R = false;

    // method
    std::string method = "auto";     // classical | fast | auto (classical for N <= 8)
    int M = 64;                      // fast-path directions

    // quad
    int quad_radial = 0;             // 0: 2N+8
    int quad_angular = 0;            // 0: 4N+8
    double quad_tol = 1e-8;
    int quad_max_doublings = 4;

    // time
    double dt = 0.0;                 // 0: cfl_safety / (beta00 |f|_1)
    double cfl_safety = 0.5;
    double t_end = 1.0;
    std::string scheme = "rk4";
    bool force_dt = false;

    // initial
    double mass = 1.0;
    std::vector<GaussianBump> bumps;

    // diag
    int cadence = 20;
    double sobolev_p = 0.0;
    double entropy_floor_rel = 1e-14;
    int d_every = 0;                 // evaluate entropy production every k-th row; 0: off
    int d_grid = 0;
    double d_budget = 1e9;

    // output
    std::string out_dir = "out";
    std::string csv_path;            // empty: <out_dir>/diagnostics.csv
    std::vector<double> snapshot_times;

    // budget
    double phys_budget = 1e9;
    std::uint64_t table_bytes = 256ull << 20;
    bool force = false;

    // cache
    std::string table_path;          // empty: <out_dir>/bkmt_<hash>.bin
    bool auto_precompute = true;

    // spreading
    double spread_r = 0.0;           // 0: 0.5 L
    int spread_grid = 128;
    int spread_radial = 12;
    int spread_angular = 24;

    // consistency
    std::vector<int> consistency_N = {4, 8, 16, 32};
    std::vector<double> consistency_p = {0.0, 2.0};
    int consistency_M = 512;
    double consistency_T = 0.0625;

    // oracle
    int oracle_N = 4;
    int oracle_M = 128;

    KernelSpec kernel_spec() const;
    TorusGrid grid() const;
    TruncationMethod resolved_method() const;
    QuadResolution quad_resolution() const;
    TimeScheme time_scheme() const;
    InitialSpec initial_spec() const;
    std::string resolved_csv_path() const;
    std::string resolved_table_path() const;

    void validate() const;
};

Config parse_config(const std::string& path);
Config parse_config_text(const std::string& text);

// Canonical serialization: keys in fixed order, defaults omitted.
// parse(echo(c)) reproduces c, and echo(parse(s)) is a fixed point.
std::string echo_config(const Config& cfg);

} // namespace bspec
