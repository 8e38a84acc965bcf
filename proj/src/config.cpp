#include "bspec/config.hpp"

#include "bspec/errors.hpp"
#include "bspec/modes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace bspec {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& key, const std::string& v, F&& one) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(key + ": empty list element");
        out.push_back(one(key, item));
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

KernelSpec Config::kernel_spec() const {
    KernelSpec spec;
    spec.d = d;
    spec.gamma = gamma;
    spec.C_gamma = C_gamma;
    spec.angular = AngularLaw{AngularLaw::Kind::constant, angular_b};
    spec.R = R > 0.0 ? R : std::sqrt(2.0) * L;
    spec.L = L;
    spec.allow_subcritical_R = allow_subcritical_R;
    return spec;
}

TorusGrid Config::grid() const { return TorusGrid::make(d, N, L, n_phys); }

TruncationMethod Config::resolved_method() const {
    if (method == "classical") return TruncationMethod::classical;
    if (method == "fast") return TruncationMethod::fast;
    if (d == 3) return TruncationMethod::classical;
    return N <= 8 ? TruncationMethod::classical : TruncationMethod::fast;
}

QuadResolution Config::quad_resolution() const {
    QuadResolution res = default_resolution(N);
    if (quad_radial > 0) res.radial = quad_radial;
    if (quad_angular > 0) res.angular = quad_angular;
    return res;
}

TimeScheme Config::time_scheme() const { return parse_scheme(scheme); }

InitialSpec Config::initial_spec() const { return InitialSpec{bumps, mass}; }

std::string Config::resolved_csv_path() const {
    return csv_path.empty() ? out_dir + "/diagnostics.csv" : csv_path;
}

std::string Config::resolved_table_path() const {
    if (!table_path.empty()) return table_path;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(mode_table_key_hash(
                      kernel_spec(), N, resolved_method(), quad_resolution())));
    return out_dir + "/bkmt_" + buf + ".bin";
}

void Config::validate() const {
    if (d != 2 && d != 3) throw ConfigError("domain.d must be 2 or 3");
    if (N < 1) throw ConfigError("domain.N must be >= 1");
    if (!(L > 0.0)) throw ConfigError("domain.L must be positive");
    if (n_phys != 0 && n_phys < 2 * N + 1)
        throw ConfigError("domain.n_phys must be 0 (auto) or >= 2N+1");

    kernel_spec().validate();

    if (method != "auto" && method != "classical" && method != "fast")
        throw ConfigError("method.path must be auto, classical or fast");
    if (resolved_method() == TruncationMethod::fast) {
        if (d != 2)
            throw ConfigError("method.path = fast requires domain.d = 2 "
                              "(the d=3 fast path is not implemented)");
        if (gamma != 0.0)
            throw ConfigError("method.path = fast requires kernel.gamma = 0 "
                              "(the separable kernel family)");
    }
    if (M < 1) throw ConfigError("method.M must be >= 1");

    if (quad_radial < 0 || quad_angular < 0)
        throw ConfigError("quad.radial/quad.angular must be nonnegative (0 = auto)");
    if (!(quad_tol > 0.0)) throw ConfigError("quad.tol must be positive");
    if (quad_max_doublings < 1) throw ConfigError("quad.max_doublings must be >= 1");

    if (dt < 0.0) throw ConfigError("time.dt must be nonnegative (0 = auto)");
    if (!(cfl_safety > 0.0) || cfl_safety > 1.0)
        throw ConfigError("time.cfl_safety must lie in (0,1]");
    if (t_end < 0.0) throw ConfigError("time.t_end must be nonnegative");
    parse_scheme(scheme);

    if (!(mass > 0.0)) throw ConfigError("initial.mass must be positive");
    for (std::size_t i = 0; i < bumps.size(); ++i) {
        const std::string name = "initial.bump" + std::to_string(i + 1);
        const auto& b = bumps[i];
        if (!(b.weight > 0.0)) throw ConfigError(name + ".w must be positive");
        if (!(b.temperature > 0.0)) throw ConfigError(name + ".T must be positive");
        for (int ax = 0; ax < d; ++ax)
            if (std::abs(b.center[ax]) > L)
                throw ConfigError(name + " center lies outside the box [-L,L]^d");
    }

    if (cadence < 1) throw ConfigError("diag.cadence must be >= 1");
    if (sobolev_p < 0.0) throw ConfigError("diag.sobolev_p must be >= 0");
    if (!(entropy_floor_rel > 0.0)) throw ConfigError("diag.entropy_floor_rel must be positive");
    if (d_every < 0) throw ConfigError("diag.d_every must be >= 0");

    if (spread_grid < 8) throw ConfigError("spreading.grid must be >= 8");
    for (int n : consistency_N)
        if (n < 1) throw ConfigError("consistency.N_list entries must be >= 1");
    for (double p : consistency_p)
        if (p < 0.0) throw ConfigError("consistency.p_list entries must be >= 0");
    if (consistency_M < 1) throw ConfigError("consistency.M must be >= 1");
    if (!(consistency_T > 0.0)) throw ConfigError("consistency.T must be positive");
    if (oracle_N < 1) throw ConfigError("oracle.N must be >= 1");
    if (oracle_M < 1) throw ConfigError("oracle.M must be >= 1");
}

namespace {

struct BumpDraft {
    GaussianBump bump;
    bool has_w = false, has_ux = false, has_uy = false, has_uz = false, has_T = false;
};

} // namespace

Config parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw ConfigError("duplicate key: " + key);
    }

    Config cfg;
    std::map<int, BumpDraft> drafts;

    auto take = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        const std::string* v = &it->second;
        return v;
    };

    if (auto v = take("domain.d")) cfg.d = static_cast<int>(to_int("domain.d", *v));
    if (auto v = take("domain.N")) cfg.N = static_cast<int>(to_int("domain.N", *v));
    if (auto v = take("domain.L")) cfg.L = to_double("domain.L", *v);
    if (auto v = take("domain.n_phys")) cfg.n_phys = static_cast<int>(to_int("domain.n_phys", *v));

    if (auto v = take("kernel.gamma")) cfg.gamma = to_double("kernel.gamma", *v);
    if (auto v = take("kernel.C_gamma")) cfg.C_gamma = to_double("kernel.C_gamma", *v);
    if (auto v = take("kernel.R")) cfg.R = to_double("kernel.R", *v);
    if (auto v = take("kernel.angular_b")) cfg.angular_b = to_double("kernel.angular_b", *v);
    if (auto v = take("kernel.allow_subcritical_R"))
        cfg.allow_subcritical_R = to_bool("kernel.allow_subcritical_R", *v);

    if (auto v = take("method.path")) cfg.method = *v;
    if (auto v = take("method.M")) cfg.M = static_cast<int>(to_int("method.M", *v));

    if (auto v = take("quad.radial")) cfg.quad_radial = static_cast<int>(to_int("quad.radial", *v));
    if (auto v = take("quad.angular"))
        cfg.quad_angular = static_cast<int>(to_int("quad.angular", *v));
    if (auto v = take("quad.tol")) cfg.quad_tol = to_double("quad.tol", *v);
    if (auto v = take("quad.max_doublings"))
        cfg.quad_max_doublings = static_cast<int>(to_int("quad.max_doublings", *v));

    if (auto v = take("time.dt")) cfg.dt = to_double("time.dt", *v);
    if (auto v = take("time.cfl_safety")) cfg.cfl_safety = to_double("time.cfl_safety", *v);
    if (auto v = take("time.t_end")) cfg.t_end = to_double("time.t_end", *v);
    if (auto v = take("time.scheme")) cfg.scheme = *v;
    if (auto v = take("time.force_dt")) cfg.force_dt = to_bool("time.force_dt", *v);

    if (auto v = take("initial.mass")) cfg.mass = to_double("initial.mass", *v);

    if (auto v = take("diag.cadence")) cfg.cadence = static_cast<int>(to_int("diag.cadence", *v));
    if (auto v = take("diag.sobolev_p")) cfg.sobolev_p = to_double("diag.sobolev_p", *v);
    if (auto v = take("diag.entropy_floor_rel"))
        cfg.entropy_floor_rel = to_double("diag.entropy_floor_rel", *v);
    if (auto v = take("diag.d_every")) cfg.d_every = static_cast<int>(to_int("diag.d_every", *v));
    if (auto v = take("diag.d_grid")) cfg.d_grid = static_cast<int>(to_int("diag.d_grid", *v));
    if (auto v = take("diag.d_budget")) cfg.d_budget = to_double("diag.d_budget", *v);

    if (auto v = take("output.dir")) cfg.out_dir = *v;
    if (auto v = take("output.csv")) cfg.csv_path = *v;
    if (auto v = take("output.snapshot_times"))
        cfg.snapshot_times = to_list<double>("output.snapshot_times", *v, to_double);

    if (auto v = take("budget.phys")) cfg.phys_budget = to_double("budget.phys", *v);
    if (auto v = take("budget.table_bytes"))
        cfg.table_bytes = static_cast<std::uint64_t>(to_int("budget.table_bytes", *v));
    if (auto v = take("budget.force")) cfg.force = to_bool("budget.force", *v);

    if (auto v = take("cache.table_path")) cfg.table_path = *v;
    if (auto v = take("cache.auto_precompute"))
        cfg.auto_precompute = to_bool("cache.auto_precompute", *v);

    if (auto v = take("spreading.r")) cfg.spread_r = to_double("spreading.r", *v);
    if (auto v = take("spreading.grid"))
        cfg.spread_grid = static_cast<int>(to_int("spreading.grid", *v));
    if (auto v = take("spreading.radial"))
        cfg.spread_radial = static_cast<int>(to_int("spreading.radial", *v));
    if (auto v = take("spreading.angular"))
        cfg.spread_angular = static_cast<int>(to_int("spreading.angular", *v));

    if (auto v = take("consistency.N_list"))
        cfg.consistency_N = to_list<int>("consistency.N_list", *v, [](auto& k, auto& s) {
            return static_cast<int>(to_int(k, s));
        });
    if (auto v = take("consistency.p_list"))
        cfg.consistency_p = to_list<double>("consistency.p_list", *v, to_double);
    if (auto v = take("consistency.M"))
        cfg.consistency_M = static_cast<int>(to_int("consistency.M", *v));
    if (auto v = take("consistency.T")) cfg.consistency_T = to_double("consistency.T", *v);

    if (auto v = take("oracle.N")) cfg.oracle_N = static_cast<int>(to_int("oracle.N", *v));
    if (auto v = take("oracle.M")) cfg.oracle_M = static_cast<int>(to_int("oracle.M", *v));

    // bump keys: initial.bumpK.{w,ux,uy,uz,T}
    static const std::string known_prefixes[] = {
        "domain.d", "domain.N", "domain.L", "domain.n_phys",
        "kernel.gamma", "kernel.C_gamma", "kernel.R", "kernel.angular_b",
        "kernel.allow_subcritical_R",
        "method.path", "method.M",
        "quad.radial", "quad.angular", "quad.tol", "quad.max_doublings",
        "time.dt", "time.cfl_safety", "time.t_end", "time.scheme", "time.force_dt",
        "initial.mass",
        "diag.cadence", "diag.sobolev_p", "diag.entropy_floor_rel", "diag.d_every",
        "diag.d_grid", "diag.d_budget",
        "output.dir", "output.csv", "output.snapshot_times",
        "budget.phys", "budget.table_bytes", "budget.force",
        "cache.table_path", "cache.auto_precompute",
        "spreading.r", "spreading.grid", "spreading.radial", "spreading.angular",
        "consistency.N_list", "consistency.p_list", "consistency.M", "consistency.T",
        "oracle.N", "oracle.M",
    };

    for (const auto& [key, value] : kv) {
        bool known = std::find(std::begin(known_prefixes), std::end(known_prefixes), key) !=
                     std::end(known_prefixes);
        if (known) continue;
        if (key.rfind("initial.bump", 0) == 0) {
            const std::string rest = key.substr(12);
            const auto dot = rest.find('.');
            if (dot != std::string::npos) {
                const int idx = static_cast<int>(to_int(key, rest.substr(0, dot)));
                const std::string field = rest.substr(dot + 1);
                if (idx >= 1 && idx <= 8) {
                    BumpDraft& draft = drafts[idx];
                    if (field == "w") {
                        draft.bump.weight = to_double(key, value);
                        draft.has_w = true;
                        continue;
                    }
                    if (field == "ux") {
                        draft.bump.center[0] = to_double(key, value);
                        draft.has_ux = true;
                        continue;
                    }
                    if (field == "uy") {
                        draft.bump.center[1] = to_double(key, value);
                        draft.has_uy = true;
                        continue;
                    }
                    if (field == "uz") {
                        draft.bump.center[2] = to_double(key, value);
                        draft.has_uz = true;
                        continue;
                    }
                    if (field == "T") {
                        draft.bump.temperature = to_double(key, value);
                        draft.has_T = true;
                        continue;
                    }
                }
            }
        }
        throw ConfigError("unknown key: " + key);
    }

    int expected = 1;
    for (const auto& [idx, draft] : drafts) {
        const std::string name = "initial.bump" + std::to_string(idx);
        if (idx != expected)
            throw ConfigError(name + ": bump indices must be contiguous from 1");
        ++expected;
        if (!draft.has_w || !draft.has_T || !draft.has_ux || !draft.has_uy)
            throw ConfigError(name + ": needs w, ux, uy" +
                              (cfg.d == 3 ? ", uz" : "") + " and T");
        if (cfg.d == 3 && !draft.has_uz) throw ConfigError(name + ".uz required for d = 3");
        if (cfg.d == 2 && draft.has_uz) throw ConfigError(name + ".uz given but domain.d = 2");
        cfg.bumps.push_back(draft.bump);
    }

    cfg.validate();
    return cfg;
}

Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

std::string echo_config(const Config& cfg) {
    const Config def;
    std::ostringstream out;
    auto emit_i = [&](const char* key, long v, long dv) {
        if (v != dv) out << key << " = " << v << "\n";
    };
    auto emit_d = [&](const char* key, double v, double dv) {
        if (v != dv) out << key << " = " << fmt(v) << "\n";
    };
    auto emit_b = [&](const char* key, bool v, bool dv) {
        if (v != dv) out << key << " = " << (v ? "true" : "false") << "\n";
    };
    auto emit_s = [&](const char* key, const std::string& v, const std::string& dv) {
        if (v != dv) out << key << " = " << v << "\n";
    };

    emit_i("domain.d", cfg.d, def.d);
    emit_i("domain.N", cfg.N, def.N);
    emit_d("domain.L", cfg.L, def.L);
    emit_i("domain.n_phys", cfg.n_phys, def.n_phys);
    emit_d("kernel.gamma", cfg.gamma, def.gamma);
    emit_d("kernel.C_gamma", cfg.C_gamma, def.C_gamma);
    emit_d("kernel.R", cfg.R, def.R);
    emit_d("kernel.angular_b", cfg.angular_b, def.angular_b);
    emit_b("kernel.allow_subcritical_R", cfg.allow_subcritical_R, def.allow_subcritical_R);
    emit_s("method.path", cfg.method, def.method);
    emit_i("method.M", cfg.M, def.M);
    emit_i("quad.radial", cfg.quad_radial, def.quad_radial);
    emit_i("quad.angular", cfg.quad_angular, def.quad_angular);
    emit_d("quad.tol", cfg.quad_tol, def.quad_tol);
    emit_i("quad.max_doublings", cfg.quad_max_doublings, def.quad_max_doublings);
    emit_d("time.dt", cfg.dt, def.dt);
    emit_d("time.cfl_safety", cfg.cfl_safety, def.cfl_safety);
    emit_d("time.t_end", cfg.t_end, def.t_end);
    emit_s("time.scheme", cfg.scheme, def.scheme);
    emit_b("time.force_dt", cfg.force_dt, def.force_dt);
    emit_d("initial.mass", cfg.mass, def.mass);
    for (std::size_t i = 0; i < cfg.bumps.size(); ++i) {
        const std::string base = "initial.bump" + std::to_string(i + 1);
        const auto& b = cfg.bumps[i];
        out << base << ".w = " << fmt(b.weight) << "\n";
        out << base << ".ux = " << fmt(b.center[0]) << "\n";
        out << base << ".uy = " << fmt(b.center[1]) << "\n";
        if (cfg.d == 3) out << base << ".uz = " << fmt(b.center[2]) << "\n";
        out << base << ".T = " << fmt(b.temperature) << "\n";
    }
    emit_i("diag.cadence", cfg.cadence, def.cadence);
    emit_d("diag.sobolev_p", cfg.sobolev_p, def.sobolev_p);
    emit_d("diag.entropy_floor_rel", cfg.entropy_floor_rel, def.entropy_floor_rel);
    emit_i("diag.d_every", cfg.d_every, def.d_every);
    emit_i("diag.d_grid", cfg.d_grid, def.d_grid);
    emit_d("diag.d_budget", cfg.d_budget, def.d_budget);
    emit_s("output.dir", cfg.out_dir, def.out_dir);
    emit_s("output.csv", cfg.csv_path, def.csv_path);
    if (!cfg.snapshot_times.empty()) {
        out << "output.snapshot_times = ";
        for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i)
            out << (i ? "," : "") << fmt(cfg.snapshot_times[i]);
        out << "\n";
    }
    emit_d("budget.phys", cfg.phys_budget, def.phys_budget);
    emit_i("budget.table_bytes", static_cast<long>(cfg.table_bytes),
           static_cast<long>(def.table_bytes));
    emit_b("budget.force", cfg.force, def.force);
    emit_s("cache.table_path", cfg.table_path, def.table_path);
    emit_b("cache.auto_precompute", cfg.auto_precompute, def.auto_precompute);
    emit_d("spreading.r", cfg.spread_r, def.spread_r);
    emit_i("spreading.grid", cfg.spread_grid, def.spread_grid);
    emit_i("spreading.radial", cfg.spread_radial, def.spread_radial);
    emit_i("spreading.angular", cfg.spread_angular, def.spread_angular);
    if (cfg.consistency_N != def.consistency_N) {
        out << "consistency.N_list = ";
        for (std::size_t i = 0; i < cfg.consistency_N.size(); ++i)
            out << (i ? "," : "") << cfg.consistency_N[i];
        out << "\n";
    }
    if (cfg.consistency_p != def.consistency_p) {
        out << "consistency.p_list = ";
        for (std::size_t i = 0; i < cfg.consistency_p.size(); ++i)
            out << (i ? "," : "") << fmt(cfg.consistency_p[i]);
        out << "\n";
    }
    emit_i("consistency.M", cfg.consistency_M, def.consistency_M);
    emit_d("consistency.T", cfg.consistency_T, def.consistency_T);
    emit_i("oracle.N", cfg.oracle_N, def.oracle_N);
    emit_i("oracle.M", cfg.oracle_M, def.oracle_M);
    return out.str();
}

} // namespace bspec
