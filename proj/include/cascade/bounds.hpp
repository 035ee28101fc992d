#pragma once

// Sufficient conditions for contractivity and uniform boundedness of the
// semigroup, expressed through phi along the positive real axis.

#include "cascade/parallel.hpp"
#include "cascade/system.hpp"

namespace cascade {

enum class A5Status { proved_contractive, proved_bounded_repeated_pole, numeric_pass, numeric_fail, unknown };

[[nodiscard]] inline const char* to_string(A5Status s) noexcept {
    switch (s) {
        case A5Status::proved_contractive: return "proved_contractive";
        case A5Status::proved_bounded_repeated_pole: return "proved_bounded_repeated_pole";
        case A5Status::numeric_pass: return "numeric_pass";
        case A5Status::numeric_fail: return "numeric_fail";
        case A5Status::unknown: return "unknown";
    }
    return "unknown";
}

/// 1 - |phi(x)| for real x, evaluated without cancellation as
/// (|q|^2 - |p|^2) / (|q| (|q| + |p|)).
class GapOnRealAxis {
public:
    explicit GapOnRealAxis(const RatFun& phi) : phi_(phi), rho_(modulus_diff_on_real_line(phi)) {}

    [[nodiscard]] double operator()(double x) const {
        const double q = std::abs(phi_.den()(x)), p = std::abs(phi_.num()(x));
        return rho_(x) / (q * (q + p));
    }

private:
    RatFun phi_;
    RealPoly rho_;
};

/// 1 - |phi(is)| via the axis polynomial r(s).
class GapOnImagAxis {
public:
    explicit GapOnImagAxis(const RatFun& phi) : phi_(phi), r_(modulus_diff_on_axis(phi)) {}

    [[nodiscard]] double operator()(double s) const {
        const cplx z(0.0, s);
        const double q = std::abs(phi_.den()(z)), p = std::abs(phi_.num()(z));
        return r_(s) / (q * (q + p));
    }

    [[nodiscard]] const RealPoly& r() const noexcept { return r_; }

private:
    RatFun phi_;
    RealPoly r_;
};

struct ContractivityResult {
    bool passes = false;
    double achieved_sup = 0.0;
    double limit_at_zero = 0.0;
    double limit_at_infinity = 1.0;
};

/// sup over lambda > 0 of lambda ||R|| + lambda ||R A1 R|| / (1 - |phi|).
[[nodiscard]] inline ContractivityResult check_contractivity(const CascadeSystem& sys, const CharacteristicFn& cf,
                                                             int points = 2000, double lo = 1e-6, double hi = 1e6) {
    const GapOnRealAxis gap(cf.phi);
    const auto grid = logspace(lo, hi, points);
    std::vector<double> vals(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const double x = grid[i];
        const Mat r = resolvent(sys.A0, x);
        const double g = gap(x);
        vals[i] = g <= 0.0 ? kInf : x * norm2(r) + x * norm2(r * sys.A1 * r) / g;
    }, 16);
    ContractivityResult res;
    res.achieved_sup = *std::max_element(vals.begin(), vals.end());

    if (cf.phi0 && cf.dphi0 && std::abs(std::abs(*cf.phi0) - 1.0) <= 1e-9) {
        const double d = -(std::conj(*cf.phi0) * *cf.dphi0).real();
        const Mat inv = sys.A0.partialPivLu().inverse();
        res.limit_at_zero = d > 0.0 ? norm2(inv * sys.A1 * inv) / d : kInf;
    }
    res.achieved_sup = std::max({res.achieved_sup, res.limit_at_zero, res.limit_at_infinity});
    res.passes = res.achieved_sup <= 1.0 + 1e-9;
    return res;
}

/// Detects phi = z^k / (lambda + z)^k with z > 0; returns z.
[[nodiscard]] inline std::optional<std::pair<double, int>> match_repeated_pole(const RatFun& phi) {
    const Poly& den = phi.den();
    const Poly& num = phi.num();
    const int k = den.degree();
    if (k < 1 || num.degree() != 0) return std::nullopt;
    const cplx lead = den.leading();
    cplx mean = 0.0;
    const auto roots = den.roots();
    for (cplx r : roots) mean += r;
    mean /= static_cast<double>(k);
    const double zeta = -mean.real();
    if (!(zeta > 0.0) || std::abs(mean.imag()) > 1e-8 * zeta) return std::nullopt;
    // compare coefficients with lead * (lambda + zeta)^k
    std::vector<cplx> zr(static_cast<std::size_t>(k), cplx(-zeta));
    const Poly ref = Poly::from_roots(zr, lead);
    const double tol = 1e-8 * ref.max_abs_coeff();
    for (int i = 0; i <= k; ++i)
        if (std::abs(ref.coeff(i) - den.coeff(i)) > tol) return std::nullopt;
    if (std::abs(num.coeff(0) - lead * std::pow(zeta, k)) > 1e-8 * std::abs(lead) * std::pow(zeta, k)) return std::nullopt;
    return std::make_pair(zeta, k);
}

struct Condition2Probe {
    double sup = 0.0;
    std::vector<double> sup_per_order;  // index n = derivative order
    bool passes = false;
};

/// Non-rigorous probe of sup_{n, lambda} lambda^{n+1}/n! sum_l |d^n/dlambda^n phi(lambda)^l|.
[[nodiscard]] inline Condition2Probe probe_condition2(const RatFun& phi, int n_max = 30, int points = 40,
                                                      double lo = 1e-2, double hi = 1e2) {
    const auto grid = logspace(lo, hi, points);
    const int n1 = n_max + 1;
    std::vector<std::vector<double>> per(grid.size(), std::vector<double>(static_cast<std::size_t>(n1), 0.0));
    parallel_for(grid.size(), [&](std::size_t gi) {
        const double x = grid[gi];
        const auto c = phi.taylor(x, n_max);  // c[j] = phi^{(j)}(x) / j!
        const double a = std::abs(c[0]);
        std::vector<cplx> pw(static_cast<std::size_t>(n1), 0.0);
        pw[0] = 1.0;
        std::vector<double> acc(static_cast<std::size_t>(n1), 0.0);
        std::vector<cplx> next(static_cast<std::size_t>(n1));
        for (int l = 1; l <= 200000; ++l) {
            for (int i = 0; i < n1; ++i) {
                cplx s = 0.0;
                for (int j = 0; j <= i; ++j) s += pw[static_cast<std::size_t>(j)] * c[static_cast<std::size_t>(i - j)];
                next[static_cast<std::size_t>(i)] = s;
            }
            pw.swap(next);
            double term_max = 0.0, acc_max = 0.0;
            for (int i = 0; i < n1; ++i) {
                const double v = std::abs(pw[static_cast<std::size_t>(i)]);
                acc[static_cast<std::size_t>(i)] += v;
                term_max = std::max(term_max, v / std::max(acc[static_cast<std::size_t>(i)], 1e-300));
                acc_max = std::max(acc_max, acc[static_cast<std::size_t>(i)]);
            }
            // past the peak of l^n a^l the remaining tail is geometric
            if (a < 1.0 && l > static_cast<double>(n_max) / std::max(1e-300, -std::log(a)) && term_max < 1e-13) break;
        }
        double xp = x;
        for (int n = 0; n < n1; ++n) {
            per[gi][static_cast<std::size_t>(n)] = xp * acc[static_cast<std::size_t>(n)];
            xp *= x;
        }
    }, 1);
    Condition2Probe out;
    out.sup_per_order.assign(static_cast<std::size_t>(n1), 0.0);
    for (const auto& row : per)
        for (int n = 0; n < n1; ++n)
            out.sup_per_order[static_cast<std::size_t>(n)] = std::max(out.sup_per_order[static_cast<std::size_t>(n)], row[static_cast<std::size_t>(n)]);
    double early = 0.0, late = 0.0;
    for (int n = 0; n < n1; ++n) {
        const double v = out.sup_per_order[static_cast<std::size_t>(n)];
        out.sup = std::max(out.sup, v);
        double& bucket = n < n1 - 10 ? early : late;
        bucket = std::max(bucket, v);
    }
    out.passes = std::isfinite(out.sup) && late <= 1.1 * early;
    return out;
}

struct BoundednessReport {
    bool contractive = false;
    double contractive_sup = 0.0;
    double condition1_sup = 0.0;
    bool condition2_closed_form = false;
    double closed_form_bound = 0.0;  // zeta of the repeated-pole form
    int closed_form_order = 0;
    std::optional<double> condition2_sup;  // numeric probe value when no closed form applies
    A5Status verdict = A5Status::unknown;
};

/// sup over 0 < lambda <= 1 of lambda / (1 - |phi(lambda)|).
[[nodiscard]] inline double condition1_sup(const CharacteristicFn& cf, int points = 2000) {
    const GapOnRealAxis gap(cf.phi);
    double sup = 0.0;
    for (double x : logspace(1e-6, 1.0, points)) {
        const double g = gap(x);
        sup = std::max(sup, g > 0.0 ? x / g : kInf);
    }
    if (cf.phi0 && cf.dphi0 && std::abs(std::abs(*cf.phi0) - 1.0) <= 1e-9) {
        const double d = -(std::conj(*cf.phi0) * *cf.dphi0).real();
        sup = std::max(sup, d > 0.0 ? 1.0 / d : kInf);
    }
    return sup;
}

[[nodiscard]] inline BoundednessReport check_uniform_boundedness(const CascadeSystem& sys, const CharacteristicFn& cf) {
    BoundednessReport rep;
    const auto c = check_contractivity(sys, cf);
    rep.contractive = c.passes;
    rep.contractive_sup = c.achieved_sup;
    rep.condition1_sup = condition1_sup(cf);
    if (const auto rp = match_repeated_pole(cf.phi)) {
        rep.condition2_closed_form = true;
        rep.closed_form_bound = rp->first;
        rep.closed_form_order = rp->second;
    }
    if (rep.contractive) {
        rep.verdict = A5Status::proved_contractive;
    } else if (rep.condition2_closed_form && std::isfinite(rep.condition1_sup)) {
        rep.verdict = A5Status::proved_bounded_repeated_pole;
    } else if (std::isfinite(rep.condition1_sup)) {
        const auto probe = probe_condition2(cf.phi);
        rep.condition2_sup = probe.sup;
        rep.verdict = probe.passes ? A5Status::numeric_pass : A5Status::numeric_fail;
    } else {
        rep.verdict = A5Status::numeric_fail;
    }
    return rep;
}

}  // namespace cascade
