#pragma once

// JSON and CSV conversions, atomic file output and strict config parsing.
// Complex numbers are written as [re, im]; on input a bare number is also
// accepted.

#include "cascade/decay_fit.hpp"
#include "cascade/level_set.hpp"
#include "cascade/models.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

namespace cascade::io {

using json = nlohmann::json;

/// Raised for malformed or unknown configuration content.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes through a temporary file in the same directory and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot open output file " + tmp.string());
        f << content;
        f.flush();
        if (!f) throw ConfigError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ConfigError("cannot move output into place: " + ec.message());
    }
}

// ------------------------------------------------------------- primitives

[[nodiscard]] inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

[[nodiscard]] inline json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
    return a;
}

[[nodiscard]] inline json to_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
        a.push_back(std::move(row));
    }
    return a;
}

[[nodiscard]] inline json to_json(const std::vector<cplx>& v) {
    json a = json::array();
    for (cplx z : v) a.push_back(to_json(z));
    return a;
}

[[nodiscard]] inline json exponent_json(Exponent p) {
    if (p.is_inf()) return "inf";
    return p.value();
}

[[nodiscard]] inline double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw ConfigError(what + " must be a number");
    return j.get<double>();
}

[[nodiscard]] inline std::int64_t integer(const json& j, const std::string& what) {
    if (!j.is_number_integer()) throw ConfigError(what + " must be an integer");
    return j.get<std::int64_t>();
}

[[nodiscard]] inline cplx parse_cplx(const json& j, const std::string& what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError(what + " must be a number or an [re, im] pair");
}

[[nodiscard]] inline Vec parse_vec(const json& j, const std::string& what, std::optional<int> m = std::nullopt) {
    if (!j.is_array()) throw ConfigError(what + " must be an array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_cplx(j[i], what);
    if (m && v.size() != *m) throw ConfigError(what + " must have " + std::to_string(*m) + " entries");
    return v;
}

[[nodiscard]] inline Mat parse_mat(const json& j, int m, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != m) throw ConfigError(what + " must have " + std::to_string(m) + " rows");
    Mat a(m, m);
    for (int i = 0; i < m; ++i) {
        const Vec row = parse_vec(j[static_cast<std::size_t>(i)], what + " row", m);
        a.row(i) = row.transpose();
    }
    return a;
}

[[nodiscard]] inline Exponent parse_exponent(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return Exponent::inf();
        throw ConfigError("p must be a number >= 1 or \"inf\"");
    }
    const double p = number(j, "p");
    if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("p must be a number >= 1 or \"inf\"");
    return Exponent(p);
}

[[nodiscard]] inline Exponent parse_exponent(const std::string& s) {
    if (s == "inf") return Exponent::inf();
    try {
        std::size_t pos = 0;
        const double p = std::stod(s, &pos);
        if (pos == s.size() && p >= 1.0 && std::isfinite(p)) return Exponent(p);
    } catch (const std::exception&) {
    }
    throw ConfigError("p must be 1, 2, ... or inf");
}

inline void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError("unknown key \"" + k + "\" in " + where);
}

// -------------------------------------------------------------- SeqState

[[nodiscard]] inline json tail_json(const TailRule& t) {
    json j;
    j["kind"] = t.kind();
    if (t.kind() == "constant") j["value"] = to_json(t.pattern.front());
    if (t.kind() == "periodic") {
        json p = json::array();
        for (const auto& v : t.pattern) p.push_back(to_json(v));
        j["pattern"] = std::move(p);
    }
    return j;
}

[[nodiscard]] inline json to_json(const SeqState& s) {
    json core = json::array();
    for (const auto& v : s.core()) core.push_back(to_json(v));
    return {{"offset", s.offset()}, {"core", core}, {"left_tail", tail_json(s.left_tail())},
            {"right_tail", tail_json(s.right_tail())}};
}

[[nodiscard]] inline TailRule parse_tail(const json& j, int m, const std::string& what) {
    check_keys(j, {"kind", "value", "pattern"}, what);
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError(what + " needs a kind");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "zero") return {};
    if (kind == "constant") {
        if (!j.contains("value")) throw ConfigError(what + " needs a value");
        return TailRule::constant(parse_vec(j["value"], what + " value", m));
    }
    if (kind == "periodic") {
        if (!j.contains("pattern") || !j["pattern"].is_array() || j["pattern"].empty())
            throw ConfigError(what + " needs a nonempty pattern");
        std::vector<Vec> pat;
        for (const auto& b : j["pattern"]) pat.push_back(parse_vec(b, what + " pattern block", m));
        if (static_cast<std::int64_t>(pat.size()) > kMaxTailPeriod) throw ConfigError(what + " period exceeds 4096");
        return TailRule::periodic(std::move(pat));
    }
    throw ConfigError(what + " kind must be zero, constant or periodic");
}

[[nodiscard]] inline SeqState parse_state(const json& j, int m, Exponent p, const std::string& what = "state") {
    check_keys(j, {"offset", "core", "left_tail", "right_tail"}, what);
    const std::int64_t offset = j.contains("offset") ? integer(j["offset"], what + " offset") : 0;
    std::vector<Vec> core;
    if (j.contains("core")) {
        if (!j["core"].is_array()) throw ConfigError(what + " core must be an array of blocks");
        for (const auto& b : j["core"]) core.push_back(parse_vec(b, what + " core block", m));
    }
    const TailRule left = j.contains("left_tail") ? parse_tail(j["left_tail"], m, what + " left_tail") : TailRule{};
    const TailRule right = j.contains("right_tail") ? parse_tail(j["right_tail"], m, what + " right_tail") : TailRule{};
    if (!p.is_inf() && !(left.is_zero() && right.is_zero()))
        throw ConfigError(what + ": nonzero tails are only allowed for p = inf");
    return SeqState(m, offset, std::move(core), left, right, p);
}

// --------------------------------------------------------------- systems

struct SystemConfig {
    CascadeSystem sys;
    std::string preset;  // empty for explicit matrices
    std::optional<double> zeta;
    std::optional<RobotChain> chain;
    std::vector<cplx> chain_alphas;  // one period of the chain rule
    json echo;
};

[[nodiscard]] inline json to_json(const PsiRegion& r) { return {{"psi", r.name}, {"alpha", r.alpha}}; }

[[nodiscard]] inline PsiRegion parse_region(const json& j) {
    check_keys(j, {"psi", "alpha"}, "region");
    if (!j.contains("psi") || j["psi"] != "power") throw ConfigError("region psi must be \"power\"");
    if (!j.contains("alpha")) throw ConfigError("region needs alpha");
    try {
        return PsiRegion::power(number(j["alpha"], "region alpha"));
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

[[nodiscard]] inline SystemConfig parse_system(const json& j) {
    SystemConfig out;
    out.echo = j;
    if (!j.is_object()) throw ConfigError("system must be a JSON object");
    const Exponent p = j.contains("p") ? parse_exponent(j["p"]) : Exponent::one();
    try {
        if (j.contains("preset")) {
            check_keys(j, {"preset", "zeta", "p", "alphas", "region"}, "system");
            if (!j["preset"].is_string()) throw ConfigError("preset must be a string");
            out.preset = j["preset"].get<std::string>();
            if (out.preset == "robot") {
                check_keys(j, {"preset", "p"}, "robot system");
                out.sys = robot_system(p);
            } else if (out.preset == "platoon") {
                check_keys(j, {"preset", "zeta", "p"}, "platoon system");
                out.zeta = j.contains("zeta") ? number(j["zeta"], "zeta") : 1.0;
                if (!(*out.zeta > 0.0)) throw ConfigError("zeta must be positive");
                out.sys = platoon_system(*out.zeta, p);
            } else if (out.preset == "robot-chain") {
                check_keys(j, {"preset", "p", "alphas", "region"}, "robot-chain system");
                std::vector<cplx> al{-1.0};
                if (j.contains("alphas")) {
                    const Vec v = parse_vec(j["alphas"], "alphas");
                    if (v.size() == 0) throw ConfigError("alphas must be nonempty");
                    al.assign(v.data(), v.data() + v.size());
                }
                out.chain_alphas = al;
                RobotChain ch{[al](std::int64_t k) { return al[static_cast<std::size_t>(floor_mod(k, static_cast<std::int64_t>(al.size())))]; },
                              al, std::nullopt};
                if (j.contains("region")) ch.region = parse_region(j["region"]);
                ch.validate();
                out.chain = std::move(ch);
                out.sys = robot_system(p);
            } else {
                throw ConfigError("unknown preset \"" + out.preset + "\" (robot, platoon, robot-chain)");
            }
            return out;
        }
        check_keys(j, {"m", "A0", "A1", "p"}, "system");
        if (!j.contains("m") || !j.contains("A0") || !j.contains("A1")) throw ConfigError("system needs m, A0 and A1");
        const auto m = integer(j["m"], "m");
        if (m < 1 || m > kMaxBlockSize) throw ConfigError("m must lie in [1, 16]");
        out.sys = CascadeSystem(parse_mat(j["A0"], static_cast<int>(m), "A0"), parse_mat(j["A1"], static_cast<int>(m), "A1"), p);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return out;
}

// ---------------------------------------------------------------- outputs

[[nodiscard]] inline json to_json(const Box& b) {
    return {{"re_min", b.re_min}, {"re_max", b.re_max}, {"im_min", b.im_min}, {"im_max", b.im_max}};
}

[[nodiscard]] inline json to_json(const LevelSet& ls) {
    json polys = json::array();
    for (const auto& pl : ls.polylines) polys.push_back(to_json(pl));
    json closed = json::array();
    for (bool c : ls.closed) closed.push_back(c);
    return {{"polylines", polys}, {"closed", closed}, {"grid_resolution", ls.grid_resolution},
            {"bounding_box", to_json(ls.bounding_box)}, {"vertex_count", ls.vertex_count()}};
}

[[nodiscard]] inline std::string level_set_csv(const LevelSet& ls) {
    std::ostringstream os;
    os << "re,im,polyline_id\n";
    for (std::size_t i = 0; i < ls.polylines.size(); ++i)
        for (cplx z : ls.polylines[i]) os << fmt17(z.real()) << ',' << fmt17(z.imag()) << ',' << i << '\n';
    return os.str();
}

[[nodiscard]] inline std::string trajectory_csv(const Trajectory& tr) {
    std::ostringstream os;
    const bool dist = !tr.distance_norms.empty();
    os << "t,state_norm,derivative_norm" << (dist ? ",distance_norm" : "") << ",tail_bound\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        os << fmt17(tr.times[i]) << ',' << fmt17(tr.state_norms[i]) << ',' << fmt17(tr.derivative_norms[i]);
        if (dist) os << ',' << fmt17(tr.distance_norms[i]);
        os << ',' << fmt17(tr.tail_bounds[i]) << '\n';
    }
    return os.str();
}

[[nodiscard]] inline json to_json(const DecayFit& f) {
    json j{{"window", {f.t_min, f.t_max}},
           {"fitted_exponent", f.fitted_exponent},
           {"with_log_factor", f.with_log_factor},
           {"r_squared", f.r_squared},
           {"plain_exponent", f.plain_exponent},
           {"plain_r_squared", f.plain_r_squared},
           {"log_exponent", f.log_exponent},
           {"log_r_squared", std::isfinite(f.log_r_squared) ? json(f.log_r_squared) : json(nullptr)},
           {"log_power", f.log_power},
           {"exact_zero", f.exact_zero},
           {"samples", f.samples}};
    j["predicted_exponent"] = f.predicted_exponent ? json(*f.predicted_exponent) : json(nullptr);
    return j;
}

[[nodiscard]] inline json to_json(const RatFun& r) {
    return {{"numerator", to_json(r.num().coeffs())}, {"denominator", to_json(r.den().coeffs())}};
}

}  // namespace cascade::io
