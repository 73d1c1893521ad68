#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cumulants.hpp"
#include "error.hpp"
#include "fixedpoint.hpp"
#include "largel.hpp"
#include "mc.hpp"
#include "periodic.hpp"
#include "series.hpp"
#include "validation.hpp"

namespace kpzi::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_numerical = 3;
inline constexpr double default_tol = 1e-12;

struct RunConfig {
    std::string command;
    double u = 1.0, v = 1.0, L = 1.0;
    std::optional<double> ut, vt;
    int kmax = 4;
    std::size_t nodes = default_nodes;
    std::optional<double> zeta_min, zeta_max;
    int zeta_steps = 40;
    std::size_t samples = 100000;
    std::size_t steps = 4096;
    std::uint64_t seed = 42;
    std::string out;
    std::string format = "csv";
    double u_min = 0.05, u_max = 5.0, u_step = 0.05;
    double sabotage_gamma = 0.0;
    bool u_given = false, v_given = false, format_given = false;
};

using Cell = std::variant<double, long long, std::string, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::ordered_json report = nlohmann::ordered_json::object();
    bool ok = true;  // validate: all checks passed
};

/// 17 significant digits, '.' separator regardless of locale.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) x = 0.0;  // no "-0"
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

inline std::string cell_text(const Cell& c) {
    struct V {
        std::string operator()(double d) const { return format_double(d); }
        std::string operator()(long long i) const { return std::to_string(i); }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
    };
    return std::visit(V{}, c);
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
    return std::visit([](const auto& x) { return nlohmann::ordered_json(x); }, c);
}

inline nlohmann::ordered_json config_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["nodes"] = c.nodes;
    j["kmax"] = c.kmax;
    j["tol"] = default_tol;
    j["seed"] = c.seed;
    if (c.command == "cumulants" || c.command == "rate" || c.command == "fig1") {
        j["u"] = c.u;
        j["v"] = c.v;
        j["L"] = c.L;
    }
    if (c.command == "periodic" || c.command == "mc") j["L"] = c.L;
    if (c.command == "mc") {
        if (c.u_given) j["u"] = c.u;
        j["samples"] = c.samples;
        j["steps"] = c.steps;
    }
    if (c.ut) j["ut"] = *c.ut;
    if (c.vt) j["vt"] = *c.vt;
    if (c.command == "rate") j["zeta_steps"] = c.zeta_steps;
    return j;
}

inline void write_csv(const Table& t, const RunConfig& c, std::ostream& os) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell_text(r[i]);
        os << '\n';
    }
    // trailing metadata, after the data rows
    const auto cfg = config_json(c);
    for (auto& [k, v] : cfg.items()) os << "# " << k << '=' << v.dump() << '\n';
    for (auto& [k, v] : t.report.items()) os << "# " << k << '=' << v.dump() << '\n';
}

inline void write_json(const Table& t, const RunConfig& c, std::ostream& os) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["command"] = c.command;
    j["config"] = config_json(c);
    j["columns"] = t.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
        nlohmann::ordered_json o;
        for (std::size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = cell_json(r[i]);
        rows.push_back(o);
    }
    j["rows"] = rows;
    j["report"] = t.report;
    os << j.dump(2) << '\n';
}

// --- commands ---------------------------------------------------------------

inline bool direct_domain(const BoundaryParams& p) { return p.u >= 0.0 && p.v >= 0.0 && p.u + p.v > 0.0; }

inline Table cmd_cumulants(const RunConfig& c) {
    require(c.kmax >= 1 && c.kmax <= 8, "--kmax must be in 1..8");
    const BoundaryParams p{c.u, c.v, c.L};
    require(p.L > 0.0, "L must be positive");
    Table t;
    t.columns = {"k", "c_k", "method", "refinement_delta"};
    const std::size_t n = c.nodes, n2 = 2 * c.nodes;
    if (direct_domain(p)) {
        auto a = series_cumulants(p, c.kmax, n), b = series_cumulants(p, c.kmax, n2);
        for (int k = 1; k <= c.kmax; ++k)
            t.rows.push_back({(long long)k, a.c[k - 1], std::string("series"), std::fabs(a.c[k - 1] - b.c[k - 1])});
        const int kc = std::min(c.kmax, 3);
        std::vector<double (*)(const BoundaryParams&, std::size_t)> f{
            [](const BoundaryParams& q, std::size_t m) { return c1_closed(q, m); },
            [](const BoundaryParams& q, std::size_t m) { return c2_closed(q, m); },
            [](const BoundaryParams& q, std::size_t m) { return c3_closed(q, m); }};
        for (int k = 1; k <= kc; ++k) {
            const double x = f[k - 1](p, n), y = f[k - 1](p, n2);
            t.rows.push_back({(long long)k, x, std::string("closed_form"), std::fabs(x - y)});
        }
        return t;
    }
    // continuation: c_1 everywhere off the integer points, c_2 on u + v = 0
    const double x = c1_continued(p, n), y = c1_continued(p, n2);
    t.rows.push_back({1LL, x, std::string("continuation"), std::fabs(x - y)});
    if (c.kmax >= 2 && p.u + p.v == 0.0) {
        const double a = c2_line_uv0(p, n), b = c2_line_uv0(p, n2);
        t.rows.push_back({2LL, a, std::string("continuation"), std::fabs(a - b)});
    }
    t.report["note"] = "outside u, v >= 0 only c_1 (and c_2 on u + v = 0) are available";
    return t;
}

inline Table cmd_fig1(const RunConfig& c) {
    require(c.u_step > 0.0 && c.u_max >= c.u_min && c.u_min > 0.0, "bad u grid");
    std::vector<double> us;
    const int m = int(std::floor((c.u_max - c.u_min) / c.u_step + 1e-9));
    for (int i = 0; i <= m; ++i) us.push_back(c.u_min + i * c.u_step);
    auto c2 = c2_sweep_equal(us, c.L, c.nodes);
    Table t;
    t.columns = {"u", "c2"};
    for (std::size_t i = 0; i < us.size(); ++i) t.rows.push_back({us[i], c2[i]});
    int changes = 0;
    for (std::size_t i = 2; i < c2.size(); ++i)
        if ((c2[i] - c2[i - 1]) * (c2[i - 1] - c2[i - 2]) < 0.0) ++changes;
    t.report["slope_sign_changes"] = changes;
    t.report["monotone"] = changes == 0;
    if (us.size() >= 2) {
        t.report["c2_u0_extrapolation"] = c2[0] - us[0] * (c2[1] - c2[0]) / (us[1] - us[0]);
        t.report["c2_origin"] = c2_origin(c.L);
    }
    const double p8 = c2_closed({8.0, 8.0, c.L}, c.nodes), p16 = c2_closed({16.0, 16.0, c.L}, c.nodes);
    t.report["plateau_c2_8_minus_c2_16"] = std::fabs(p8 - p16);
    return t;
}

inline std::vector<double> zeta_grid(double lo, double hi, int steps) {
    std::vector<double> z(steps);
    for (int i = 0; i < steps; ++i) z[i] = lo + (hi - lo) * i / (steps - 1);
    return z;
}

inline Table rate_table(const ParametricCurve& curve, double shift) {
    auto r = legendre(curve, shift);
    Table t;
    t.columns = {"s", "E", "H", "Phi"};
    std::size_t j = 0;
    for (const auto& p : curve.points) {
        if (p.s < 0.0) continue;
        t.rows.push_back({p.s, p.E, r.samples[j].H, r.samples[j].Phi});
        ++j;
    }
    t.report["convex"] = is_convex(r);
    t.report["zeta_max"] = curve.zeta_max;
    return t;
}

inline Table cmd_rate(const RunConfig& c) {
    require(c.zeta_steps >= 2, "--zeta-steps must be >= 2");
    if (c.ut || c.vt) {
        const ScaledParams sp{c.ut.value_or(0.0), c.vt.value_or(0.0)};
        const double zm = 1.0 / phi_max(sp);
        const double lo = c.zeta_min.value_or(0.0), hi = c.zeta_max.value_or(0.98 * zm);
        if (!(hi > lo) || !(hi < zm)) throw numerical_error("empty zeta window");
        auto curve = scaled_curve(sp, zeta_grid(lo, hi, c.zeta_steps));
        auto t = rate_table(curve, 0.0);
        t.report["mode"] = "scaled";
        return t;
    }
    const BoundaryParams p{c.u, c.v, c.L};
    require(direct_domain(p) && p.L > 0.0, "rate needs u, v >= 0 and L > 0");
    auto mw = build_weights(p, c.nodes);
    auto kk = build_kk(mw.grid);
    SolveOptions so;
    so.tol = default_tol;
    const double zm = zeta_max(mw, kk, 1e-3, so);
    const double lo = c.zeta_min.value_or(0.0), hi = c.zeta_max.value_or(0.98 * zm);
    if (!(hi > lo)) throw numerical_error("empty zeta window");
    auto curve = trace_curve(mw, kk, zeta_grid(lo, hi, c.zeta_steps), so);
    curve.zeta_max = zm;
    auto t = rate_table(curve, 1.0 / 24.0);
    t.report["mode"] = "finite_L";
    t.report["c1_plus_1_24"] = c1_from_weights(mw) + 1.0 / 24.0;
    return t;
}

inline Table cmd_largel(const RunConfig& c) {
    require(c.kmax >= 1 && c.kmax <= 8, "--kmax must be in 1..8");
    const ScaledParams sp{c.ut.value_or(1.0), c.vt.value_or(1.0)};
    auto s = scaled_cumulants(sp, c.kmax);
    Table t;
    t.columns = {"k", "c_t", "phi_k", "psi_k"};
    for (int k = 1; k <= c.kmax; ++k) t.rows.push_back({(long long)k, s.c_t[k - 1], s.phi_k[k - 1], s.psi_k[k - 1]});
    return t;
}

inline Table cmd_periodic(const RunConfig& c) {
    require(c.kmax >= 1 && c.kmax <= 8, "--kmax must be in 1..8");
    require(c.L > 0.0, "L must be positive");
    auto a = periodic_cumulants(c.L, c.kmax, c.nodes), b = periodic_cumulants(c.L, c.kmax, 2 * c.nodes);
    Table t;
    t.columns = {"k", "c_k", "method", "refinement_delta"};
    for (int k = 1; k <= c.kmax; ++k)
        t.rows.push_back({(long long)k, a.c[k - 1], std::string("periodic"), std::fabs(a.c[k - 1] - b.c[k - 1])});
    auto bd = bd_crosscheck(c.L);
    t.report["c1_exact"] = -1.0 / 24.0 - 0.5 / c.L;
    t.report["bd_res1"] = bd.res1;
    t.report["bd_res2"] = bd.res2;
    return t;
}

inline Table cmd_mc(const RunConfig& c) {
    require(c.L > 0.0, "L must be positive");
    require(c.samples >= 2 && c.steps >= 1, "need --samples >= 2 and --steps >= 1");
    MCOptions o;
    o.n_samples = c.samples;
    o.n_steps = c.steps;
    o.seed = c.seed;
    Table t;
    t.columns = {"estimator", "mean", "stderr", "n_samples", "n_steps", "seed", "denominator_mean",
                 "denominator_stderr", "reference"};
    if (c.u_given) {
        if (c.v_given && std::fabs(c.v - (1.0 - c.u)) > 1e-15)
            throw domain_error("mc samples the line v = 1 - u only");
        auto e = mc_c1_open_line(c.u, c.L, o);
        const BoundaryParams p{c.u, 1.0 - c.u, c.L};
        const double ref = direct_domain(p) ? c1_closed(p, c.nodes) : c1_continued(p, c.nodes);
        t.rows.push_back({std::string("open_line"), e.mean, e.stderr_, (long long)e.n_samples,
                          (long long)e.n_steps, std::to_string(e.seed), e.denom_mean, e.denom_stderr, ref});
    } else {
        auto e = mc_c1_periodic(c.L, o);
        t.rows.push_back({std::string("periodic"), e.mean, e.stderr_, (long long)e.n_samples, (long long)e.n_steps,
                          std::to_string(e.seed), std::nan(""), std::nan(""), -1.0 / 24.0 - 0.5 / c.L});
    }
    return t;
}

inline Table cmd_validate(const RunConfig& c) {
    ValidateOptions o;
    o.nodes = c.nodes;
    o.mc.n_samples = c.samples;
    o.mc.n_steps = c.steps;
    o.mc.seed = c.seed;
    o.gamma_perturbation = c.sabotage_gamma;
    auto checks = run_validation(o);
    Table t;
    t.columns = {"check", "deviation", "threshold", "pass"};
    bool all = true;
    for (const auto& k : checks) {
        t.rows.push_back({k.name, k.deviation, k.threshold, k.pass});
        if (!k.error.empty()) t.report["error_" + k.name] = k.error;
        all = all && k.pass;
    }
    t.report["all_pass"] = all;
    t.ok = all;
    return t;
}

// --- entry point -------------------------------------------------------------

/// Parses argv, runs the command, writes the output. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig cfg;
    CLI::App app{"Stationary KPZ cumulants on an interval"};
    app.require_subcommand(1, 1);
    auto add_common = [&](CLI::App* s) {
        s->add_option("--nodes", cfg.nodes, "quadrature nodes (minimum)")->check(CLI::Range(32, 100000));
        s->add_option("--out", cfg.out, "output file (default stdout)");
        s->add_option_function<std::string>("--format", [&](const std::string& f) {
            cfg.format = f;
            cfg.format_given = true;
        }, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    };
    auto add_uvl = [&](CLI::App* s) {
        s->add_option_function<double>("--u", [&](double x) { cfg.u = x; cfg.u_given = true; }, "boundary parameter u");
        s->add_option_function<double>("--v", [&](double x) { cfg.v = x; cfg.v_given = true; }, "boundary parameter v");
        s->add_option("--L", cfg.L, "interval length");
    };
    auto add_scaled = [&](CLI::App* s) {
        s->add_option("--ut", cfg.ut, "scaled u");
        s->add_option("--vt", cfg.vt, "scaled v");
    };
    auto add_mc = [&](CLI::App* s) {
        s->add_option("--samples", cfg.samples, "Monte Carlo samples");
        s->add_option("--steps", cfg.steps, "path discretization steps");
        s->add_option("--seed", cfg.seed, "RNG seed");
    };

    auto* cum = app.add_subcommand("cumulants", "c_k by series and closed forms");
    add_common(cum);
    add_uvl(cum);
    cum->add_option("--kmax", cfg.kmax, "highest order");

    auto* fig = app.add_subcommand("fig1", "sweep u -> c_2(u, u, L)");
    add_common(fig);
    fig->add_option("--L", cfg.L, "interval length");
    fig->add_option("--u-min", cfg.u_min);
    fig->add_option("--u-max", cfg.u_max);
    fig->add_option("--u-step", cfg.u_step);

    auto* rate = app.add_subcommand("rate", "parametric curve and rate function");
    add_common(rate);
    add_uvl(rate);
    add_scaled(rate);
    rate->add_option("--zeta-min", cfg.zeta_min);
    rate->add_option("--zeta-max", cfg.zeta_max);
    rate->add_option("--zeta-steps", cfg.zeta_steps);

    auto* lar = app.add_subcommand("largel", "scaled cumulants");
    add_common(lar);
    add_scaled(lar);
    lar->add_option("--kmax", cfg.kmax, "highest order");

    auto* per = app.add_subcommand("periodic", "periodic cumulants");
    add_common(per);
    per->add_option("--L", cfg.L, "ring length");
    per->add_option("--kmax", cfg.kmax, "highest order");

    auto* mc = app.add_subcommand("mc", "Monte Carlo c_1 (periodic, or v = 1 - u when --u is given)");
    add_common(mc);
    add_uvl(mc);
    add_mc(mc);

    auto* val = app.add_subcommand("validate", "run the invariant suite");
    add_common(val);
    add_mc(val);
    val->add_option("--sabotage-gamma", cfg.sabotage_gamma, "relative perturbation of the kk diagonal")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "validate" && !cfg.format_given) cfg.format = "json";
    for (double x : {cfg.u, cfg.v, cfg.L, cfg.ut.value_or(0.0), cfg.vt.value_or(0.0), cfg.zeta_min.value_or(0.0),
                     cfg.zeta_max.value_or(0.0), cfg.u_min, cfg.u_max, cfg.u_step, cfg.sabotage_gamma}) {
        if (!std::isfinite(x)) {
            err << "usage error: numeric arguments must be finite\n";
            return exit_usage;
        }
    }

    Table t;
    try {
        if (cfg.command == "cumulants") t = cmd_cumulants(cfg);
        else if (cfg.command == "fig1") t = cmd_fig1(cfg);
        else if (cfg.command == "rate") t = cmd_rate(cfg);
        else if (cfg.command == "largel") t = cmd_largel(cfg);
        else if (cfg.command == "periodic") t = cmd_periodic(cfg);
        else if (cfg.command == "mc") t = cmd_mc(cfg);
        else t = cmd_validate(cfg);
    } catch (const domain_error& e) {
        err << "domain error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        err << "domain error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "numerical error: " << e.what() << '\n';
        return exit_numerical;
    }

    std::ostringstream buf;
    if (cfg.format == "json")
        write_json(t, cfg, buf);
    else
        write_csv(t, cfg, buf);
    if (cfg.out.empty()) {
        out << buf.str();
    } else {
        std::ofstream f(cfg.out, std::ios::binary);
        if (!f) {
            err << "cannot open " << cfg.out << '\n';
            return exit_usage;
        }
        f << buf.str();
    }
    return t.ok ? exit_ok : exit_numerical;
}

}  // namespace kpzi::cli
