#pragma once

// Power-law fits of trajectory norms, with and without a logarithmic
// correction ((log t)^g / t)^a.

#include "cascade/semigroup.hpp"

namespace cascade {

enum class DecayQuantity { state_norm, derivative_norm, distance };

[[nodiscard]] inline const char* to_string(DecayQuantity q) noexcept {
    switch (q) {
        case DecayQuantity::state_norm: return "state_norm";
        case DecayQuantity::derivative_norm: return "derivative_norm";
        case DecayQuantity::distance: return "distance";
    }
    return "state_norm";
}

struct DecayFit {
    double t_min = 0.0, t_max = 0.0;
    double fitted_exponent = 0.0;  // of the preferred model
    bool with_log_factor = false;
    double r_squared = 0.0;
    std::optional<double> predicted_exponent;  // -1/n_phi
    double plain_exponent = 0.0, plain_r_squared = 0.0;
    double log_exponent = 0.0, log_r_squared = 0.0;
    double log_power = 0.0;  // g in ((log t)^g / t)
    bool exact_zero = false;
    std::size_t samples = 0;
};

namespace detail {

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

[[nodiscard]] inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

}  // namespace detail

/// Fit over samples with t in [t_min, t_max]. Values within ten times the
/// kernel truncation bound are discarded as noise.
[[nodiscard]] inline DecayFit fit_decay_rate(const Trajectory& tr, DecayQuantity quantity, double t_min, double t_max,
                                             Exponent p = Exponent::one(), std::optional<int> n_phi = std::nullopt,
                                             double zero_tol = 1e-12) {
    if (!(t_min > 0.0) || !(t_max > t_min)) throw Error(ErrorKind::InvalidArgument, "fit window must satisfy 0 < t_min < t_max");
    const std::vector<double>* src = nullptr;
    switch (quantity) {
        case DecayQuantity::state_norm: src = &tr.state_norms; break;
        case DecayQuantity::derivative_norm: src = &tr.derivative_norms; break;
        case DecayQuantity::distance: src = &tr.distance_norms; break;
    }
    if (src->size() != tr.times.size())
        throw Error(ErrorKind::InvalidArgument, "trajectory has no values for the requested quantity");

    DecayFit fit;
    fit.t_min = t_min;
    fit.t_max = t_max;
    fit.log_power = p.log_power();
    if (n_phi) fit.predicted_exponent = -1.0 / static_cast<double>(*n_phi);

    std::vector<double> ts, vs, noise;
    bool all_zero = true;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        if (t < t_min || t > t_max) continue;
        const double v = (*src)[i];
        all_zero = all_zero && v <= zero_tol;
        ts.push_back(t);
        vs.push_back(v);
        noise.push_back(i < tr.tail_bounds.size() ? tr.tail_bounds[i] : 0.0);
    }
    if (ts.size() < 20) throw Error(ErrorKind::InvalidArgument, "fewer than 20 samples in the fit window");
    if (all_zero) {
        fit.exact_zero = true;
        fit.samples = ts.size();
        fit.r_squared = 1.0;
        return fit;
    }
    std::vector<double> lt, lq, llog;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(vs[i] > 10.0 * noise[i]) || !(vs[i] > 0.0) || !std::isfinite(vs[i])) continue;
        lt.push_back(std::log(ts[i]));
        lq.push_back(std::log(vs[i]));
        llog.push_back(fit.log_power * std::log(std::log(ts[i])) - std::log(ts[i]));
    }
    fit.samples = lt.size();
    if (fit.samples < 20) throw Error(ErrorKind::WindowTooNoisy, "too few samples above the noise floor");

    const auto plain = detail::least_squares(lt, lq);
    fit.plain_exponent = plain.slope;
    fit.plain_r_squared = plain.r2;
    if (t_min > 1.0) {
        const auto lg = detail::least_squares(llog, lq);
        fit.log_exponent = -lg.slope;
        fit.log_r_squared = lg.r2;
    } else {
        fit.log_exponent = fit.plain_exponent;
        fit.log_r_squared = -kInf;  // log t changes sign inside the window
    }
    if (fit.plain_r_squared < 0.9 && fit.log_r_squared < 0.9)
        throw Error(ErrorKind::WindowTooNoisy, "neither model fits (r^2 < 0.9); widen the window or move it later");
    fit.with_log_factor = fit.log_power > 0.0 && fit.log_r_squared > fit.plain_r_squared;
    fit.fitted_exponent = fit.with_log_factor ? fit.log_exponent : fit.plain_exponent;
    fit.r_squared = fit.with_log_factor ? fit.log_r_squared : fit.plain_r_squared;
    return fit;
}

}  // namespace cascade
