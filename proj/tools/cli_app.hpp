#pragma once

// Command-line front end. All logic lives here so tests can drive run()
// in-process; cascade_cli.cpp only forwards argv.

#include "cascade/cascade.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cascade::cli {

using io::json;
using io::ConfigError;

inline constexpr const char* kVersion = "0.4.0";

enum ExitCode : int { kOk = 0, kConfig = 1, kAssumption = 2, kAccuracy = 3, kFitQuality = 4 };

[[nodiscard]] inline int exit_code_for(ErrorKind k) noexcept {
    switch (k) {
        case ErrorKind::AssumptionViolated:
        case ErrorKind::NoCharacteristicFunction:
        case ErrorKind::NotEvenOrder:
            return kAssumption;
        case ErrorKind::AccuracyExceeded:
            return kAccuracy;
        case ErrorKind::WindowTooNoisy:
            return kFitQuality;
        default:
            return kConfig;
    }
}

struct Flags {
    std::string command;
    std::optional<std::string> config_path, preset, p, out, format;
    std::optional<double> zeta, tmin, tmax, epsilon;
    std::optional<int> tpoints;
    std::optional<std::int64_t> nmax;
};

inline const std::set<std::string> kConfigKeys = {
    "system", "initial_state", "reference_state", "box", "resolution", "tmin", "tmax", "tpoints",
    "spacing", "n_max", "epsilon", "out", "format", "quantity", "window", "s_min", "s_max", "s_points",
    "r_min", "r_max", "r_points", "c"};

/// Config file merged with command-line overrides; the merged JSON is echoed as "inputs".
struct RunConfig {
    json raw = json::object();

    [[nodiscard]] bool has(const char* k) const { return raw.contains(k); }
    [[nodiscard]] double num(const char* k, double dflt) const { return has(k) ? io::number(raw[k], k) : dflt; }
    [[nodiscard]] std::int64_t integer(const char* k, std::int64_t dflt) const {
        return has(k) ? io::integer(raw[k], k) : dflt;
    }
    [[nodiscard]] std::string str(const char* k, const std::string& dflt) const {
        if (!has(k)) return dflt;
        if (!raw[k].is_string()) throw ConfigError(std::string(k) + " must be a string");
        return raw[k].get<std::string>();
    }
    [[nodiscard]] double epsilon() const {
        const double e = num("epsilon", 1e-12);
        if (!(e > 0.0)) throw ConfigError("epsilon must be positive");
        return e;
    }
    [[nodiscard]] std::string format() const {
        const std::string f = str("format", "json");
        if (f != "json" && f != "csv") throw ConfigError("format must be json or csv");
        return f;
    }
    [[nodiscard]] io::SystemConfig system() const {
        if (!has("system")) throw ConfigError("no system given; use --preset or a config with a \"system\" entry");
        return io::parse_system(raw["system"]);
    }
    [[nodiscard]] SeqState state(const char* key, const CascadeSystem& sys) const {
        if (!has(key)) {
            Vec e = Vec::Zero(sys.m);
            e(0) = 1.0;
            return SeqState::delta(sys.m, 0, e, sys.p);
        }
        return io::parse_state(raw[key], sys.m, sys.p, key);
    }
    [[nodiscard]] std::vector<double> times(double tmin_d, double tmax_d, int points_d) const {
        const double tmin = num("tmin", tmin_d), tmax = num("tmax", tmax_d);
        const auto n = integer("tpoints", points_d);
        if (!(tmin >= 0.0) || !(tmax >= 0.0)) throw ConfigError("times must be nonnegative");
        if (!(tmax >= tmin)) throw ConfigError("tmax must not be below tmin");
        if (n < 1 || n > 1'000'000) throw ConfigError("tpoints must lie in [1, 1000000]");
        const std::string sp = str("spacing", tmin > 0.0 ? "log" : "linear");
        if (sp == "log") {
            if (!(tmin > 0.0)) throw ConfigError("log spacing needs tmin > 0");
            return logspace(tmin, tmax, static_cast<int>(n));
        }
        if (sp != "linear") throw ConfigError("spacing must be log or linear");
        return linspace(tmin, tmax, static_cast<int>(n));
    }
};

[[nodiscard]] inline RunConfig build_config(const Flags& f) {
    RunConfig rc;
    if (f.config_path) {
        std::ifstream in(*f.config_path);
        if (!in) throw ConfigError("cannot read config file " + *f.config_path);
        try {
            rc.raw = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        io::check_keys(rc.raw, kConfigKeys, "config");
    }
    if (f.preset) {
        rc.raw["system"] = json{{"preset", *f.preset}};
    }
    if (f.zeta) {
        if (!rc.raw.contains("system") || !rc.raw["system"].is_object() || rc.raw["system"].value("preset", "") != "platoon")
            throw ConfigError("--zeta applies to the platoon preset only");
        rc.raw["system"]["zeta"] = *f.zeta;
    }
    if (f.p) {
        if (!rc.raw.contains("system")) throw ConfigError("--p needs a system");
        rc.raw["system"]["p"] = io::exponent_json(io::parse_exponent(*f.p));
    }
    if (f.tmin) rc.raw["tmin"] = *f.tmin;
    if (f.tmax) rc.raw["tmax"] = *f.tmax;
    if (f.tpoints) rc.raw["tpoints"] = *f.tpoints;
    if (f.nmax) rc.raw["n_max"] = *f.nmax;
    if (f.epsilon) rc.raw["epsilon"] = *f.epsilon;
    if (f.out) rc.raw["out"] = *f.out;
    if (f.format) rc.raw["format"] = *f.format;
    return rc;
}

struct CommandOutput {
    json results = json::object();
    std::string csv;
    int exit_code = kOk;
    std::string message;
};

// ---------------------------------------------------------------- commands

[[nodiscard]] inline json report_json(const AssumptionReport& r) {
    return {{"a1", r.a1_holds}, {"a2", r.a2_holds}, {"a3", r.a3_holds}, {"a4", r.a4_holds},
            {"a5", to_string(r.a5_status)}, {"diagnostics", r.diagnostics}};
}

[[nodiscard]] inline const CascadeSystem& constant_coefficient(const io::SystemConfig& s) {
    if (s.chain && !(s.chain_alphas.size() == 1 && std::abs(s.chain_alphas[0] + 1.0) == 0.0))
        throw ConfigError("a robot chain with varying coefficients is only supported by the bounds command");
    return s.sys;
}

[[nodiscard]] inline CommandOutput cmd_analyze(const RunConfig& rc) {
    const auto sysconf = rc.system();
    const CascadeSystem& sys = constant_coefficient(sysconf);
    const CharacteristicFn cf = extract_char_fn(sys);  // a1/a2 failures abort with exit code 2
    const AssumptionReport rep = check_assumptions(sys);
    CommandOutput out;
    json& r = out.results;
    r["assumptions"] = report_json(rep);
    r["phi"] = io::to_json(cf.phi);
    r["phi_poles"] = io::to_json(cf.phi.poles());
    r["validation_residual"] = cf.validation_residual;
    r["n_phi"] = cf.n_phi ? json(*cf.n_phi) : json(nullptr);
    r["phi0"] = cf.phi0 ? io::to_json(*cf.phi0) : json(nullptr);
    r["dphi0"] = cf.dphi0 ? io::to_json(*cf.dphi0) : json(nullptr);
    r["sigma_A0"] = io::to_json(eigenvalues(sys.A0));
    std::ostringstream os;
    os << "quantity,value\n";
    for (const char* k : {"a1", "a2", "a3", "a4"}) os << k << ',' << (r["assumptions"][k].get<bool>() ? 1 : 0) << '\n';
    os << "a5," << to_string(rep.a5_status) << '\n';
    os << "n_phi," << (cf.n_phi ? std::to_string(*cf.n_phi) : "") << '\n';
    out.csv = os.str();
    return out;
}

[[nodiscard]] inline Box default_box(const CharacteristicFn& cf, const CascadeSystem& sys) {
    double rad = 1.0;
    for (cplx z : cf.phi.poles()) rad = std::max(rad, std::abs(z));
    for (cplx z : eigenvalues(sys.A0)) rad = std::max(rad, std::abs(z));
    const double r = 2.0 * rad + 1.0;
    return {-r, r, -r, r};
}

[[nodiscard]] inline CommandOutput cmd_trace_spectrum(const RunConfig& rc) {
    const auto sysconf = rc.system();
    const CascadeSystem& sys = constant_coefficient(sysconf);
    const CharacteristicFn cf = extract_char_fn(sys);
    Box box = default_box(cf, sys);
    if (rc.has("box")) {
        const json& b = rc.raw["box"];
        io::check_keys(b, {"re_min", "re_max", "im_min", "im_max"}, "box");
        for (const char* k : {"re_min", "re_max", "im_min", "im_max"})
            if (!b.contains(k)) throw ConfigError(std::string("box needs ") + k);
        box = {io::number(b["re_min"], "re_min"), io::number(b["re_max"], "re_max"), io::number(b["im_min"], "im_min"),
               io::number(b["im_max"], "im_max")};
    }
    // cells along the longer side of the box
    const auto cells = rc.integer("resolution", 400);
    if (cells < 4 || cells > 20000) throw ConfigError("resolution must lie in [4, 20000]");
    const double h = std::max(box.re_max - box.re_min, box.im_max - box.im_min) / static_cast<double>(cells);
    const LevelSet ls = trace_level_set(cf, box, h);
    CommandOutput out;
    out.results["level_set"] = io::to_json(ls);
    out.results["sigma_A0"] = io::to_json(eigenvalues(sys.A0));
    out.csv = io::level_set_csv(ls);
    return out;
}

[[nodiscard]] inline CommandOutput cmd_simulate(const RunConfig& rc) {
    const auto sysconf = rc.system();
    const CascadeSystem& sys = constant_coefficient(sysconf);
    const SeqState x0 = rc.state("initial_state", sys);
    std::optional<SeqState> z;
    if (rc.has("reference_state")) z = rc.state("reference_state", sys);
    const auto times = rc.times(0.0, 10.0, 21);
    const KernelBuilder kb(sys);
    const Trajectory tr = simulate(kb, x0, times, z, rc.epsilon(), false);
    CommandOutput out;
    json& r = out.results;
    r["times"] = tr.times;
    r["state_norms"] = tr.state_norms;
    r["derivative_norms"] = tr.derivative_norms;
    if (z) r["distance_norms"] = tr.distance_norms;
    r["tail_bounds"] = tr.tail_bounds;
    double worst = 0.0;
    for (double b : tr.tail_bounds) worst = std::max(worst, b);
    r["max_tail_bound"] = worst;
    out.csv = io::trajectory_csv(tr);
    // tail_bound is per unit sup-norm of x0; compare against 1e-6 ||x0||
    const double x0n = x0.norm(sys.p), x0s = x0.sup_norm();
    if (x0n > 0.0 && worst * x0s > 1e-6 * x0n) {
        out.exit_code = kAccuracy;
        out.message = "kernel truncation error exceeds 1e-6 relative; lower --epsilon";
    }
    return out;
}

[[nodiscard]] inline CommandOutput cmd_classify(const RunConfig& rc) {
    const auto sysconf = rc.system();
    const CascadeSystem& sys = constant_coefficient(sysconf);
    const CharacteristicFn cf = extract_char_fn(sys);
    if (!cf.phi0) throw Error(ErrorKind::AssumptionViolated, "phi has a pole at 0; assumption a4 fails");
    const SeqState x0 = rc.state("initial_state", sys);
    const auto n_max = rc.integer("n_max", 10000);
    if (n_max < 10 || n_max > 100'000'000) throw ConfigError("n_max must lie in [10, 1e8]");
    const CesaroReport rep = cesaro_classify(sys, cf, x0, n_max);
    CommandOutput out;
    json& r = out.results;
    r["convergent"] = rep.convergent;
    r["verdict"] = to_string(rep.verdict);
    r["limit_y0"] = rep.limit_y0 ? io::to_json(*rep.limit_y0) : json(nullptr);
    r["limit_state"] = rep.limit_state ? io::to_json(*rep.limit_state) : json(nullptr);
    r["sup_n_times_residual"] = rep.sup_n_times_residual;
    r["n_max"] = rep.n_max;
    json curve = json::array();
    std::ostringstream os;
    os << "n,residual\n";
    for (const auto& [n, v] : rep.residual_curve) {
        curve.push_back({n, v});
        os << n << ',' << io::fmt17(v) << '\n';
    }
    r["residual_curve"] = curve;
    // O(1/n): n * residual does not grow over the last decade
    double early = 0.0, late = 0.0;
    for (const auto& [n, v] : rep.residual_curve) {
        const double nv = static_cast<double>(n) * v;
        if (n * 10 <= rep.n_max) early = std::max(early, nv);
        else late = std::max(late, nv);
    }
    const bool o_inv = rep.convergent && !sys.p.is_reflexive() && late <= 2.0 * std::max(early, 1e-300);
    r["o_n_inverse"] = o_inv;
    if (o_inv && cf.n_phi) {
        r["predicted_exponent"] = -1.0 / *cf.n_phi;
        r["predicted_log_power"] = sys.p.log_power();
    }
    out.csv = os.str();
    return out;
}

[[nodiscard]] inline CommandOutput cmd_rate_fit(const RunConfig& rc) {
    const auto sysconf = rc.system();
    const CascadeSystem& sys = constant_coefficient(sysconf);
    const CharacteristicFn cf = extract_char_fn(sys);
    const SeqState x0 = rc.state("initial_state", sys);
    std::optional<SeqState> z;
    if (rc.has("reference_state")) z = rc.state("reference_state", sys);
    const std::string qname = rc.str("quantity", "derivative_norm");
    DecayQuantity q;
    if (qname == "state_norm") q = DecayQuantity::state_norm;
    else if (qname == "derivative_norm") q = DecayQuantity::derivative_norm;
    else if (qname == "distance") q = DecayQuantity::distance;
    else throw ConfigError("quantity must be state_norm, derivative_norm or distance");
    if (q == DecayQuantity::distance && !z) throw ConfigError("quantity distance needs a reference_state");
    const auto times = rc.times(10.0, 1000.0, 60);
    double w0 = times.front(), w1 = times.back();
    if (rc.has("window")) {
        const json& w = rc.raw["window"];
        if (!w.is_array() || w.size() != 2) throw ConfigError("window must be [t_min, t_max]");
        w0 = io::number(w[0], "window");
        w1 = io::number(w[1], "window");
    }
    const KernelBuilder kb(sys);
    const Trajectory tr = simulate(kb, x0, times, z, rc.epsilon(), false);
    CommandOutput out;
    try {
        const DecayFit fit = fit_decay_rate(tr, q, w0, w1, sys.p, cf.n_phi);
        out.results["fit"] = io::to_json(fit);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument) throw ConfigError(e.what());
        throw;
    }
    out.results["quantity"] = qname;
    out.csv = io::trajectory_csv(tr);
    return out;
}

[[nodiscard]] inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return detail::least_squares(lx, ly).slope;
}

[[nodiscard]] inline CommandOutput cmd_bounds(const RunConfig& rc) {
    const auto sysconf = rc.system();
    CommandOutput out;
    json& r = out.results;
    std::ostringstream os;
    const double c = rc.num("c", 0.5);
    if (sysconf.chain) {
        const RobotChain& ch = *sysconf.chain;
        const double r0 = rc.num("r_min", 1e-4), r1 = rc.num("r_max", 1e-2);
        const auto np = rc.integer("r_points", 20);
        if (!(r0 > 0.0 && r1 <= 1.0 && r1 > r0) || np < 2) throw ConfigError("need 0 < r_min < r_max <= 1, r_points >= 2");
        std::function<MofR(double)> mfun;
        if (ch.region) mfun = [&](double x) { return m_of_r(*ch.region, x); };
        else mfun = [&](double x) { return m_of_r(ch, x); };
        std::vector<double> rs = logspace(r0, r1, static_cast<int>(np)), ms;
        json rows = json::array();
        os << "r,m_at_r,m_sup\n";
        for (double x : rs) {
            const MofR v = mfun(x);
            ms.push_back(v.sup_value);
            rows.push_back({{"r", x}, {"m_at_r", v.value_at_r}, {"m_sup", v.sup_value}});
            os << io::fmt17(x) << ',' << io::fmt17(v.value_at_r) << ',' << io::fmt17(v.sup_value) << '\n';
        }
        r["m_of_r"] = rows;
        r["m_slope"] = loglog_slope(rs, ms);
        r["region"] = ch.region ? io::to_json(*ch.region) : json(nullptr);
        r["alphas"] = io::to_json(sysconf.chain_alphas);
        const std::function<double(double)> msup = [&](double x) { return mfun(x).sup_value; };
        r["predicted_exponent"] = mlog_predicted_exponent(msup, c, 1e8, 1e12, 20);
        out.csv = os.str();
        return out;
    }
    const CascadeSystem& sys = sysconf.sys;
    const CharacteristicFn cf = extract_char_fn(sys);
    const BoundednessReport b = check_uniform_boundedness(sys, cf);
    const ContractivityResult con = check_contractivity(sys, cf);
    r["contractive"] = con.passes;
    r["contractivity_sup"] = con.achieved_sup;
    r["condition1_sup"] = b.condition1_sup;
    r["condition2_closed_form"] = b.condition2_closed_form;
    if (b.condition2_closed_form) r["repeated_pole"] = {{"zeta", b.closed_form_bound}, {"order", b.closed_form_order}};
    r["condition2_probe_sup"] = b.condition2_sup ? json(*b.condition2_sup) : json(nullptr);
    r["a5"] = to_string(b.verdict);

    const double s0 = rc.num("s_min", 1e-4), s1 = rc.num("s_max", 1e-2);
    const auto np = rc.integer("s_points", 20);
    if (!(s0 > 0.0 && s1 > s0) || np < 2) throw ConfigError("need 0 < s_min < s_max and s_points >= 2");
    std::vector<double> ss, centers;
    json rows = json::array();
    os << "s,phi_abs,lower,center,upper\n";
    for (double s : logspace(s0, s1, static_cast<int>(np))) {
        const ResolventEstimate e = resolvent_estimate(sys, cf, cplx(0.0, s));
        ss.push_back(s);
        centers.push_back(e.center);
        json row{{"s", s}, {"phi_abs", std::abs(e.phi)}, {"lower", e.lower()}, {"center", e.center}, {"upper", e.upper()}};
        row["witness_ratio"] = e.witness_ratio ? json(*e.witness_ratio) : json(nullptr);
        rows.push_back(std::move(row));
        os << io::fmt17(s) << ',' << io::fmt17(std::abs(e.phi)) << ',' << io::fmt17(e.lower()) << ','
           << io::fmt17(e.center) << ',' << io::fmt17(e.upper()) << '\n';
    }
    r["resolvent_on_axis"] = rows;
    r["resolvent_slope"] = loglog_slope(ss, centers);
    r["n_phi"] = cf.n_phi ? json(*cf.n_phi) : json(nullptr);
    if (sysconf.preset == "robot") r["robot_constants"] = {{"t0_2", robot_AT_bound_constant(2.0)}, {"t0_100", robot_AT_bound_constant(100.0)}};
    out.csv = os.str();
    return out;
}

[[nodiscard]] inline CommandOutput cmd_robot_kernel(const RunConfig& rc) {
    if (rc.has("system")) {
        const auto sysconf = rc.system();
        if (sysconf.preset != "robot") throw ConfigError("robot-kernel applies to the robot preset only");
    }
    const auto times = rc.times(2.0, 1000.0, 100);
    CommandOutput out;
    json rows = json::array();
    std::ostringstream os;
    os << "t,bound,bound_times_sqrt_t,scaled_norm1\n";
    for (double t : times) {
        const RobotKernel k = robot_kernel_closed_form(t);
        rows.push_back({{"t", t}, {"bound", k.bound}, {"bound_times_sqrt_t", k.bound * std::sqrt(t)},
                        {"scaled_norm1", k.scaled_norm1}, {"terms", k.poisson.size()}});
        os << io::fmt17(t) << ',' << io::fmt17(k.bound) << ',' << io::fmt17(k.bound * std::sqrt(t)) << ','
           << io::fmt17(k.scaled_norm1) << '\n';
    }
    out.results["kernel"] = rows;
    if (times.front() > 1.0) out.results["bound_constant"] = {{"t0", times.front()}, {"C", robot_AT_bound_constant(times.front())}};
    out.csv = os.str();
    return out;
}

[[nodiscard]] inline json tolerances_json(const RunConfig& rc) {
    return {{"epsilon", rc.epsilon()}, {"level_set", 1e-9}, {"root_cluster", kRootClusterTol},
            {"cesaro_floor", 1e-8}, {"fit_r_squared", 0.9}, {"simulate_relative", 1e-6}};
}

// -------------------------------------------------------------------- run

[[nodiscard]] inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Analysis and simulation of infinite cascade systems"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config_path, "JSON config file");
    app.add_option("--preset", f.preset, "robot | platoon | robot-chain");
    app.add_option("--zeta", f.zeta, "platoon pole parameter");
    app.add_option("--p", f.p, "sequence space exponent: 1, 2, ... or inf");
    app.add_option("--out", f.out, "output path (written atomically)");
    app.add_option("--format", f.format, "json | csv");
    app.add_option("--tmin", f.tmin, "first sample time");
    app.add_option("--tmax", f.tmax, "last sample time");
    app.add_option("--tpoints", f.tpoints, "number of sample times");
    app.add_option("--nmax", f.nmax, "largest Cesaro index");
    app.add_option("--epsilon", f.epsilon, "kernel truncation tolerance");
    using Cmd = CommandOutput (*)(const RunConfig&);
    struct Entry {
        const char* name;
        const char* help;
        Cmd fn;
    };
    const std::vector<Entry> cmds = {
        {"analyze", "characteristic function, assumptions and n_phi", cmd_analyze},
        {"trace-spectrum", "trace the level set |phi| = 1", cmd_trace_spectrum},
        {"simulate", "evolve an initial state and record norms", cmd_simulate},
        {"classify", "Cesaro classification of an initial state", cmd_classify},
        {"rate-fit", "fit a power-law decay rate to a simulated trajectory", cmd_rate_fit},
        {"bounds", "contractivity, boundedness and resolvent growth", cmd_bounds},
        {"robot-kernel", "closed-form robot kernel and its explicit bound", cmd_robot_kernel}};
    for (const auto& c : cmds) app.add_subcommand(c.name, c.help)->fallthrough();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfig;
    }
    Cmd fn = nullptr;
    for (const auto& c : cmds)
        if (app.got_subcommand(c.name)) {
            f.command = c.name;
            fn = c.fn;
        }

    try {
        const RunConfig rc = build_config(f);
        const std::string format = rc.format();
        CommandOutput res = fn(rc);
        json record{{"command", f.command}, {"inputs", rc.raw}, {"results", std::move(res.results)},
                    {"version", kVersion}, {"tolerances", tolerances_json(rc)}};
        const std::string text = format == "csv" ? res.csv : record.dump(2) + "\n";
        if (rc.has("out")) io::atomic_write(rc.str("out", ""), text);
        else out << text;
        if (!res.message.empty()) err << "error: " << res.message << '\n';
        return res.exit_code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const Error& e) {
        const int code = exit_code_for(e.kind());
        err << "error [" << to_string(e.kind()) << "]: " << e.what();
        if (e.kind() == ErrorKind::WindowTooNoisy) err << " (widen the fit window or move it to later times)";
        err << '\n';
        return code;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kConfig;
    }
}

}  // namespace cascade::cli
