#pragma once

// Preset systems (vehicle platoon, robot rendezvous), closed forms for the
// robot kernel, and the variable-coefficient robot chain with its resolvent
// bound function m(r) and the inverse of m_log.

#include "cascade/semigroup.hpp"

#include <array>
#include <functional>

namespace cascade {

// ---------------------------------------------------------------- platoon

struct PlatoonParams {
    std::array<cplx, 3> alpha{1.0, 3.0, 3.0};  // alpha0, alpha1, alpha2

    /// alpha0 = z^3, alpha1 = 3 z^2, alpha2 = 3 z: a triple pole at -z.
    [[nodiscard]] static PlatoonParams from_zeta(double zeta) {
        if (!(zeta > 0.0) || !std::isfinite(zeta)) throw Error(ErrorKind::InvalidArgument, "zeta must be positive");
        return {{zeta * zeta * zeta, 3.0 * zeta * zeta, 3.0 * zeta}};
    }
    /// Feedback u_k = b1 y_k + b2 w_k + b3 a_k with engine time constant tau.
    [[nodiscard]] static PlatoonParams from_feedback(double tau, cplx b1, cplx b2, cplx b3) {
        if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
        return {{-b1 / tau, -b2 / tau, (1.0 - b3) / tau}};
    }
};

[[nodiscard]] inline CascadeSystem platoon_system(const PlatoonParams& prm, Exponent p = Exponent::one()) {
    Mat a0 = Mat::Zero(3, 3);
    a0(0, 1) = 1.0;
    a0(1, 2) = 1.0;
    a0(2, 0) = -prm.alpha[0];
    a0(2, 1) = -prm.alpha[1];
    a0(2, 2) = -prm.alpha[2];
    Mat a1 = Mat::Zero(3, 3);
    a1(0, 1) = -1.0;
    return CascadeSystem(std::move(a0), std::move(a1), p);
}

[[nodiscard]] inline CascadeSystem platoon_system(double zeta, Exponent p = Exponent::one()) {
    return platoon_system(PlatoonParams::from_zeta(zeta), p);
}

// ------------------------------------------------------------------ robot

[[nodiscard]] inline CascadeSystem robot_system(Exponent p = Exponent::one()) {
    return CascadeSystem(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 1.0), p);
}

/// log(e^{-t} t^n / n!) without cancellation for large n.
[[nodiscard]] inline double log_poisson_weight(double t, std::int64_t n) {
    if (t == 0.0) return n == 0 ? 0.0 : -kInf;
    const auto nd = static_cast<double>(n);
    if (n < 10) return -t + nd * std::log(t) - std::lgamma(nd + 1.0);
    const double f = t - nd;
    const double corr = 1.0 / (12.0 * nd) - 1.0 / (360.0 * nd * nd * nd) + 1.0 / (1260.0 * std::pow(nd, 5));
    return -f + nd * std::log1p(f / nd) - 0.5 * std::log(2.0 * kPi * nd) - corr;
}

struct RobotKernel {
    double t = 0.0;
    std::vector<double> poisson;   // e^{-t} t^n / n!, n = 0, 1, ...
    std::vector<double> y_scaled;  // e^{-t} y_k(t) with y_k = t^k/k! - t^{k+1}/(k+1)!
    double scaled_norm1 = 0.0;     // e^{-t} ||y(t)||_1
    double bound = 0.0;            // e^{-t} (1 + ||y(t)||_1), an upper bound for ||A T(t)||
    std::int64_t mode = 0;
};

/// Poisson weights by recurrence outwards from the mode, never forming t^n/n!.
[[nodiscard]] inline RobotKernel robot_kernel_closed_form(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::TimeNegative, "time must be nonnegative");
    RobotKernel rk;
    rk.t = t;
    const auto mode = static_cast<std::int64_t>(std::floor(t));
    rk.mode = mode;
    const double pm = std::exp(log_poisson_weight(t, mode));
    std::vector<double> below;  // pi_{mode-1}, pi_{mode-2}, ...
    double v = pm;
    for (std::int64_t n = mode; n > 0; --n) {
        v *= static_cast<double>(n) / t;
        below.push_back(v);
    }
    rk.poisson.assign(below.rbegin(), below.rend());
    rk.poisson.push_back(pm);
    v = pm;
    for (std::int64_t n = mode + 1;; ++n) {
        v *= t / static_cast<double>(n);
        rk.poisson.push_back(v);
        const double ratio = t / static_cast<double>(n + 1);
        if (ratio < 1.0 && v * ratio / (1.0 - ratio) < 1e-17) break;
    }
    rk.y_scaled.resize(rk.poisson.size());
    double s = 0.0;
    for (std::size_t k = 0; k < rk.poisson.size(); ++k) {
        const double next = k + 1 < rk.poisson.size() ? rk.poisson[k + 1] : 0.0;
        rk.y_scaled[k] = rk.poisson[k] - next;
        s += std::abs(rk.y_scaled[k]);
    }
    rk.scaled_norm1 = s;
    rk.bound = rk.poisson.front() + s;
    return rk;
}

/// Closed form of e^{-t}(1 + ||y(t)||_1): the terms telescope to twice the largest Poisson weight.
[[nodiscard]] inline double robot_AT_bound(double t) {
    if (!(t >= 0.0)) throw Error(ErrorKind::TimeNegative, "time must be nonnegative");
    return 2.0 * std::exp(log_poisson_weight(t, static_cast<std::int64_t>(std::floor(t))));
}

/// C(t0) with e^{-t}(1 + ||y(t)||_1) <= C(t0) t^{-1/2} for t >= t0.
[[nodiscard]] inline double robot_AT_bound_constant(double t0) {
    if (!(t0 > 1.0)) throw Error(ErrorKind::DomainError, "the bound constant needs t0 > 1");
    return std::sqrt(t0) * std::exp(-t0) + std::sqrt(2.0 / kPi) * std::exp((-t0 - 0.5) * std::log1p(-1.0 / t0));
}

// ------------------------------------------------------------ robot chain

/// Region {re z <= -psi(|im z|)} bounded by a C^1 nondecreasing psi with psi(0) = 1.
struct PsiRegion {
    std::function<double(double)> psi_minus_one;  // psi(s) - 1, kept separate for accuracy near 0
    std::function<double(double)> psi_prime;
    std::string name = "custom";
    double alpha = 0.0;

    [[nodiscard]] static PsiRegion power(double alpha) {
        if (!(alpha >= 1.0) || !std::isfinite(alpha))
            throw Error(ErrorKind::InvalidArgument, "power region needs alpha >= 1");
        PsiRegion r;
        r.psi_minus_one = [alpha](double s) { return std::pow(s, alpha); };
        r.psi_prime = [alpha](double s) { return alpha == 1.0 ? 1.0 : alpha * std::pow(s, alpha - 1.0); };
        r.name = "power";
        r.alpha = alpha;
        r.validate();
        return r;
    }

    [[nodiscard]] double psi(double s) const { return 1.0 + psi_minus_one(s); }

    void validate() const {
        if (std::abs(psi_minus_one(0.0)) > 1e-12) throw Error(ErrorKind::InvalidArgument, "psi(0) must equal 1");
        double prev = psi_minus_one(0.0);
        for (int i = 1; i <= 1000; ++i) {
            const double v = psi_minus_one(i / 1000.0);
            if (v < prev || !(v > 0.0)) throw Error(ErrorKind::InvalidArgument, "psi must be increasing with psi(s) > 1 for s > 0");
            prev = v;
        }
    }

    /// dist(is, region)^2 - 1 attained at boundary height u (0 <= u <= s).
    [[nodiscard]] double dist2_minus_one(double s, double u) const {
        const double pm = psi_minus_one(u);
        return pm * (pm + 2.0) + (s - u) * (s - u);
    }
};

struct RobotChain {
    std::function<cplx(std::int64_t)> alpha;
    std::vector<cplx> value_set;  // closure of {alpha_k}
    std::optional<PsiRegion> region;

    [[nodiscard]] static RobotChain uniform() {
        RobotChain c{[](std::int64_t) { return cplx(-1.0); }, {cplx(-1.0)}, std::nullopt};
        c.validate();
        return c;
    }
    [[nodiscard]] static RobotChain alternating(cplx even, cplx odd) {
        RobotChain c{[even, odd](std::int64_t k) { return floor_mod(k, 2) == 0 ? even : odd; }, {even, odd}, std::nullopt};
        c.validate();
        return c;
    }

    /// Each value is -1 or has real part below -1.
    void validate() const {
        if (!alpha || value_set.empty()) throw Error(ErrorKind::InvalidArgument, "robot chain needs a rule and its value set");
        for (cplx a : value_set)
            if (!(std::abs(a + 1.0) <= 1e-14 || a.real() < -1.0))
                throw Error(ErrorKind::InvalidArgument, "chain coefficients must equal -1 or have real part below -1");
    }

    [[nodiscard]] double dist(cplx lambda) const {
        double d = kInf;
        for (cplx a : value_set) d = std::min(d, std::abs(lambda - a));
        return d;
    }
};

struct VarcoefResolvent {
    SeqState state;
    double norm_bound = 0.0;  // 1 / (dist(lambda, Omega) - 1)
};

/// y_k = (x_k + y_{k-1}) / (lambda - alpha_k), summed forward until the geometric
/// tail (ratio 1/dist) drops below 1e-12 of the running maximum.
[[nodiscard]] inline VarcoefResolvent varcoef_resolvent_apply(const RobotChain& chain, const SeqState& x, cplx lambda) {
    if (x.m() != 1) throw Error(ErrorKind::InvalidArgument, "robot chains have scalar blocks");
    if (!x.finitely_supported()) throw Error(ErrorKind::InvalidArgument, "variable-coefficient resolvent needs finite support");
    const double d = chain.dist(lambda);
    if (!(d > 1.0 + 1e-9)) throw Error(ErrorKind::TooCloseToSpectrum, "dist(lambda, Omega) must exceed 1");
    const double q = 1.0 / d;
    std::vector<Vec> core;
    cplx y = 0.0;
    double ymax = 0.0;
    for (std::int64_t k = x.offset();; ++k) {
        y = (x.at(k)(0) + y) / (lambda - chain.alpha(k));
        core.push_back(Vec::Constant(1, y));
        ymax = std::max(ymax, std::abs(y));
        if (k >= x.end() && std::abs(y) * q / (1.0 - q) <= 1e-12 * ymax) break;
        if (k - x.end() > 100'000'000) throw Error(ErrorKind::AccuracyExceeded, "geometric tail does not decay");
    }
    return {SeqState(1, x.offset(), std::move(core), {}, {}, x.exponent()), 1.0 / (d - 1.0)};
}

/// sup-norm of (lambda - A) y - x for the chain generator (A y)_k = alpha_k y_k + y_{k-1}.
[[nodiscard]] inline double varcoef_identity_residual(const RobotChain& chain, const SeqState& x, const SeqState& y,
                                                      cplx lambda) {
    double r = 0.0;
    const std::int64_t lo = std::min(x.offset(), y.offset()), hi = std::max(x.end(), y.end());
    for (std::int64_t k = lo; k <= hi; ++k)
        r = std::max(r, std::abs((lambda - chain.alpha(k)) * y.at(k)(0) - y.at(k - 1)(0) - x.at(k)(0)));
    return r;
}

struct MofR {
    double value_at_r = 0.0;  // 1 / (dist(ir) - 1)
    double sup_value = 0.0;   // sup over r <= |s| <= 1
    double arg_sup = 0.0;
};

namespace detail {

template <class F>
double golden_min(F f, double a, double b, int iters = 100) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && b - a > 1e-16 * std::max(1.0, std::abs(a)); ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? c : d;
}

/// dist(is, Omega) - 1 for a finite set, via (d^2 - 1) / (d + 1).
[[nodiscard]] inline double finite_gap(const std::vector<cplx>& omega, double s) {
    double best = kInf;
    for (cplx a : omega) {
        const double dr = -a.real(), di = s - a.imag();
        const double d2m1 = (dr - 1.0) * (dr + 1.0) + di * di;
        best = std::min(best, d2m1 / (std::sqrt(dr * dr + di * di) + 1.0));
    }
    return best;
}

}  // namespace detail

/// m(r) for a chain with finitely many coefficient values (the point -1 is always included).
[[nodiscard]] inline MofR m_of_r(const RobotChain& chain, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorKind::InvalidArgument, "r must lie in (0, 1]");
    std::vector<cplx> omega = chain.value_set;
    omega.push_back(-1.0);
    auto gap = [&](double s) { return detail::finite_gap(omega, s); };
    MofR out;
    const double g_r = std::min(gap(r), gap(-r));
    if (!(g_r > 0.0)) throw Error(ErrorKind::InfiniteM, "dist(i s, Omega) <= 1 at s = " + std::to_string(r));
    out.value_at_r = 1.0 / g_r;
    double best_gap = g_r, best_s = r;
    const int n = 2000;
    for (int sign : {1, -1}) {
        for (int i = 0; i <= n; ++i) {
            const double s = sign * (r + (1.0 - r) * i / n);
            const double g = gap(s);
            if (!(g > 0.0)) throw Error(ErrorKind::InfiniteM, "dist(i s, Omega) <= 1 at s = " + std::to_string(s));
            if (g < best_gap) {
                best_gap = g;
                best_s = s;
            }
        }
    }
    // local refinement around the best grid point
    const double h = (1.0 - r) / n;
    const double lo = std::abs(best_s) - h, hi = std::abs(best_s) + h;
    const double sg = best_s < 0 ? -1.0 : 1.0;
    const double a = std::max(r, lo), b = std::min(1.0, hi);
    if (b > a) {
        const double s = sg * detail::golden_min([&](double u) { return gap(sg * u); }, a, b);
        const double g = gap(s);
        if (g < best_gap) {
            best_gap = g;
            best_s = s;
        }
    }
    if (!(best_gap > 0.0)) throw Error(ErrorKind::InfiniteM, "dist(i s, Omega) <= 1 at s = " + std::to_string(best_s));
    out.sup_value = 1.0 / best_gap;
    out.arg_sup = best_s;
    return out;
}

/// dist(ir, region) - 1.
[[nodiscard]] inline double region_gap(const PsiRegion& reg, double r) {
    const double dp0 = reg.psi_prime(0.0);
    if (dp0 == 0.0) {
        // nearest boundary height q solves q + psi(q) psi'(q) = r
        double lo = 0.0, hi = r;
        for (int i = 0; i < 200 && hi - lo > 1e-300; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            if (mid + reg.psi(mid) * reg.psi_prime(mid) < r) lo = mid;
            else hi = mid;
        }
        const double q = 0.5 * (lo + hi);
        const double x = reg.psi_prime(q) * reg.psi_prime(q);
        const double sx = std::sqrt(1.0 + x);
        return reg.psi_minus_one(q) * sx + x / (sx + 1.0);
    }
    const double u = detail::golden_min([&](double v) { return reg.dist2_minus_one(r, v); }, 0.0, r);
    const double d2m1 = std::min(reg.dist2_minus_one(r, u), reg.dist2_minus_one(r, 0.0));
    return d2m1 / (std::sqrt(1.0 + d2m1) + 1.0);
}

[[nodiscard]] inline MofR m_of_r(const PsiRegion& reg, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorKind::InvalidArgument, "r must lie in (0, 1]");
    MofR out;
    const double g = region_gap(reg, r);
    if (!(g > 0.0)) throw Error(ErrorKind::InfiniteM, "dist(i r, region) <= 1 at r = " + std::to_string(r));
    out.value_at_r = 1.0 / g;
    out.sup_value = out.value_at_r;
    out.arg_sup = r;
    for (int i = 1; i <= 2000; ++i) {
        const double s = r + (1.0 - r) * i / 2000.0;
        const double v = 1.0 / region_gap(reg, s);
        if (v > out.sup_value) {
            out.sup_value = v;
            out.arg_sup = s;
        }
    }
    return out;
}

// ------------------------------------------------------------------ m_log

/// m(r) log(1 + m(r)/r), evaluated without overflow for huge m/r.
[[nodiscard]] inline double m_log(const std::function<double(double)>& m, double r) {
    const double mv = m(r);
    if (!std::isfinite(mv)) return kInf;
    const double ratio = mv / r;
    const double lg = ratio > 1e10 ? std::log(mv) - std::log(r) + std::log1p(r / mv) : std::log1p(ratio);
    return mv * lg;
}

struct MlogInverse {
    std::optional<double> r;      // empty in the bounded regime
    bool bounded_regime = false;  // m_log stays below c t as r -> 0
};

/// r with m_log(r) = c t, by bisection in log r.
[[nodiscard]] inline MlogInverse mlog_inverse(const std::function<double(double)>& m, double c, double t) {
    if (!(c > 0.0 && c < 1.0)) throw Error(ErrorKind::InvalidArgument, "c must lie in (0, 1)");
    const double target = c * t;
    if (!(target >= m_log(m, 1.0))) throw Error(ErrorKind::OutOfRange, "c t lies below m_log(1)");
    // m may be too large to represent near 0 (a gap that underflows): count it as infinite
    auto ml = [&](double lr) {
        try {
            return m_log(m, std::exp(lr));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::InfiniteM) return kInf;
            throw;
        }
    };
    // bracket by decades down to 1e-150
    double lo = 0.0, hi = 0.0;
    bool found = false;
    for (int d = 1; d <= 150; ++d) {
        lo = -d * std::log(10.0);
        if (ml(lo) >= target) {
            found = true;
            break;
        }
        hi = lo;
    }
    MlogInverse out;
    if (!found) {
        out.bounded_regime = true;
        return out;
    }
    for (int i = 0; i < 400 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (ml(mid) > target) lo = mid;
        else hi = mid;
    }
    out.r = std::exp(0.5 * (lo + hi));
    return out;
}

/// Log-log slope of t -> m_log^{-1}(c t) over [t_min, t_max].
[[nodiscard]] inline double mlog_predicted_exponent(const std::function<double(double)>& m, double c, double t_min,
                                                    double t_max, int points = 40) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double t : logspace(t_min, t_max, points)) {
        const auto inv = mlog_inverse(m, c, t);
        if (!inv.r) throw Error(ErrorKind::InvalidArgument, "m is bounded; no decay rate is predicted");
        const double x = std::log(t), y = std::log(*inv.r);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = points;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace cascade
