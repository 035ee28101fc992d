#pragma once

// Two-sided resolvent norm estimates off the level set, an explicit
// near-extremal sequence for the series part Q(lambda) of the resolvent, and
// approximate eigenvectors on the level set.

#include "cascade/semigroup.hpp"

namespace cascade {

struct ResolventEstimate {
    cplx lambda;
    cplx phi;
    double center = 0.0;     // ||R A1 R|| / |1 - |phi||
    double halfwidth = 0.0;  // ||R||
    double q_norm = 0.0;     // exact ||Q(lambda)||
    std::optional<double> witness_defect;
    std::optional<double> witness_ratio;

    [[nodiscard]] double lower() const { return std::max(0.0, center - halfwidth); }
    [[nodiscard]] double upper() const { return center + halfwidth; }
};

namespace detail {

/// ||Q x|| for x_k = e^{ik theta} N^{-1/p} y0 on -N <= k <= -1, where a = |phi| and
/// qn = ||R A1 R y0|| = ||R A1 R||. Sums are evaluated in closed form.
[[nodiscard]] inline double witness_ratio(double a, double qn, std::int64_t n, double p) {
    const double inv = 1.0 / (1.0 - a);
    // k in [-N+1, 0]: S_k = (1 - a^{k+N}) / (1 - a)
    long double s = 0.0;
    for (std::int64_t j = 1; j <= n; ++j) s += std::pow((1.0 - std::pow(a, static_cast<double>(j))) * inv, p);
    // k >= 1: S_k = a^k (1 - a^N)/(1 - a)
    const double c = (1.0 - std::pow(a, static_cast<double>(n))) * inv;
    const double ap = std::pow(a, p);
    s += std::pow(c, p) * ap / (1.0 - ap);
    return qn * std::pow(static_cast<double>(s) / static_cast<double>(n), 1.0 / p);
}

}  // namespace detail

[[nodiscard]] inline ResolventEstimate resolvent_estimate(const CascadeSystem& sys, const CharacteristicFn& cf,
                                                          cplx lambda, double eps = 1e-3) {
    for (cplx e : eigenvalues(sys.A0))
        if (std::abs(e - lambda) <= 1e-12 * std::max(1.0, std::abs(e)))
            throw Error(ErrorKind::DomainError, "lambda lies in the spectrum of A0");
    ResolventEstimate est;
    est.lambda = lambda;
    est.phi = cf(lambda);
    const double a = std::abs(est.phi);
    if (std::abs(a - 1.0) <= 1e-9) throw Error(ErrorKind::OnLevelSet, "lambda lies on the level set |phi| = 1");
    const Mat r = resolvent(sys.A0, lambda);
    const Mat ra1r = r * sys.A1 * r;
    const double kn = norm2(ra1r);
    est.halfwidth = norm2(r);
    est.center = kn / std::abs(1.0 - a);
    est.q_norm = est.center;
    if (a < 1.0) {
        if (sys.p.is_inf() || kn == 0.0) {
            est.witness_ratio = est.q_norm;
            est.witness_defect = 0.0;
        } else {
            const double p = sys.p.value();
            // M with sum_{l>M} a^l < eps, N with (N - M)/N > (1 - eps)^p
            std::int64_t mm = 0;
            if (a > 0.0) mm = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(std::log(eps * (1.0 - a)) / std::log(a))));
            const double frac = 1.0 - std::pow(1.0 - eps, p);
            const double nn = std::floor(static_cast<double>(mm) / frac) + 1.0;
            if (nn <= 2e7) {  // otherwise the witness is too long to sum
                est.witness_ratio = detail::witness_ratio(a, kn, static_cast<std::int64_t>(nn), p);
                est.witness_defect = est.q_norm - *est.witness_ratio;
            }
        }
    }
    return est;
}

struct ApproxEigenvector {
    SeqState x;
    double defect = 0.0;          // ||(lambda - A) x||, computed directly
    double defect_formula = 0.0;  // closed form
};

/// Finitely supported x^n with ||x^n|| = 1 and small ||(lambda - A) x^n||, for lambda on the level set.
[[nodiscard]] inline ApproxEigenvector approx_eigenvector(const CascadeSystem& sys, const CharacteristicFn& cf,
                                                          cplx lambda, int n, std::optional<Vec> y0_in = std::nullopt) {
    if (sys.p.is_inf()) throw Error(ErrorKind::WrongSpace, "approximate eigenvectors are built for p < inf");
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be positive");
    const cplx ph = cf(lambda);
    if (std::abs(std::abs(ph) - 1.0) > 1e-8) throw Error(ErrorKind::NotInSpectrum, "lambda is not on the level set");
    Vec y0;
    if (y0_in) {
        y0 = *y0_in;
    } else {
        Eigen::JacobiSVD<Mat> svd(sys.A1, Eigen::ComputeFullV);
        y0 = svd.matrixV().col(0);
    }
    const Mat r = resolvent(sys.A0, lambda);
    const Vec v = r * (sys.A1 * y0);
    const double p = sys.p.value();
    const double c = 1.0 / (std::pow(2.0 * n + 1.0, 1.0 / p) * v.norm());
    std::vector<Vec> core;
    for (int k = -n; k <= n; ++k) core.push_back(c * std::pow(ph, static_cast<double>(k)) * v);
    ApproxEigenvector out;
    out.x = SeqState(sys.m, -n, std::move(core), {}, {}, sys.p);
    const SeqState res = out.x.scaled(lambda) - apply_generator(sys, out.x);
    out.defect = res.norm(sys.p);
    const double a = (sys.A1 * y0).norm(), b = (sys.A1 * v).norm();
    out.defect_formula =
        std::pow((std::pow(a, p) + std::pow(b, p)) / ((2.0 * n + 1.0) * std::pow(v.norm(), p)), 1.0 / p);
    return out;
}

}  // namespace cascade
