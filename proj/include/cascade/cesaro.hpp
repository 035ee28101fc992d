#pragma once

// Cesaro classification of initial states. With M x = (A1 A0^{-1} x_k) and
// psi = phi(0), the averages avg_n = (1/n) sum_{k=1..n} psi^k S^k M x0 are
// evaluated exactly. In the gauge frame (G x)_k = psi^{-k} x_k they reduce to
// plain shift averages, i.e. sliding window sums of u = G M x0.

#include "cascade/system.hpp"
#include "cascade/seq_state.hpp"

namespace cascade {

enum class CesaroVerdict { convergent, divergent, inconclusive };

[[nodiscard]] inline const char* to_string(CesaroVerdict v) noexcept {
    switch (v) {
        case CesaroVerdict::convergent: return "convergent";
        case CesaroVerdict::divergent: return "divergent";
        case CesaroVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct CesaroReport {
    bool convergent = false;
    CesaroVerdict verdict = CesaroVerdict::inconclusive;
    std::optional<Vec> limit_y0;
    std::optional<SeqState> limit_state;
    double sup_n_times_residual = 0.0;
    std::int64_t n_max = 0;
    std::vector<std::pair<std::int64_t, double>> residual_curve;
};

namespace detail {

/// Order of psi as a root of unity if it is one of order <= max_order.
[[nodiscard]] inline std::optional<std::int64_t> root_of_unity_order(cplx psi, std::int64_t max_order = 1024,
                                                                     double tol = 1e-9) {
    cplx z = psi;
    for (std::int64_t k = 1; k <= max_order; ++k) {
        if (std::abs(z - 1.0) <= tol * static_cast<double>(k)) return k;
        z *= psi;
    }
    return std::nullopt;
}

/// Blockwise norm of a window residual combined over indices, for p in {1, inf}.
struct NormAcc {
    bool sup = false;
    double value = 0.0;
    void add(double v, double count = 1.0) {
        if (sup) value = std::max(value, v);
        else value += v * count;
    }
};

}  // namespace detail

/// Exact Cesaro residual ||avg_n - y|| for one n (p = 1: y = 0, p = inf: y = (psi^k y0)).
class CesaroAverager {
public:
    CesaroAverager(const SeqState& mx, cplx psi, Vec y0, bool sup_norm)
        : mx_(mx), psi_(psi), y0_(std::move(y0)), sup_(sup_norm), m_(mx.m()) {
        order_ = detail::root_of_unity_order(psi_);
    }

    [[nodiscard]] Vec u(std::int64_t k) const { return std::pow(psi_, -static_cast<double>(k)) * mx_.at(k); }

    [[nodiscard]] double residual(std::int64_t n) const {
        detail::NormAcc acc{sup_, 0.0};
        const double inv_n = 1.0 / static_cast<double>(n);
        const std::int64_t lo = mx_.offset(), hi = mx_.end() + n;
        // explicit window: i in [lo, hi], W_i = sum_{j=i-n}^{i-1} u_j
        Vec w = Vec::Zero(m_);
        for (std::int64_t j = lo - n; j < lo; ++j) w += u(j);
        for (std::int64_t i = lo;; ++i) {
            acc.add((inv_n * w - y0_).norm());
            if (i == hi) break;
            w += u(i) - u(i - n);
        }
        if (sup_) {
            acc.add(tail_sup(mx_.left_tail(), n, true));
            acc.add(tail_sup(mx_.right_tail(), n, false));
        }
        return acc.value;
    }

private:
    /// sup over windows lying entirely in one tail.
    [[nodiscard]] double tail_sup(const TailRule& t, std::int64_t n, bool left) const {
        const std::int64_t q = t.period();
        const double inv_n = 1.0 / static_cast<double>(n);
        // W_i = psi^{-i} C_{i mod q}, C_r = sum_{d=1}^{n} psi^d P[r-d]
        std::vector<Vec> c(static_cast<std::size_t>(q), Vec::Zero(m_));
        if (!t.is_zero()) {
            for (std::int64_t r = 0; r < q; ++r) {
                cplx pd = 1.0;
                Vec s = Vec::Zero(m_);
                const std::int64_t full = n / q, rest = n % q;
                // sum over d = 1..n grouped by period
                Vec one_period = Vec::Zero(m_);
                cplx pw = 1.0;
                for (std::int64_t d = 1; d <= q; ++d) {
                    pw *= psi_;
                    one_period += pw * t.at(r - d, m_);
                }
                const cplx psi_q = std::pow(psi_, static_cast<double>(q));
                cplx geo = 0.0, g = 1.0;
                for (std::int64_t b = 0; b < full; ++b) {
                    geo += g;
                    g *= psi_q;
                }
                s = geo * one_period;
                pd = std::pow(psi_, static_cast<double>(full * q));
                for (std::int64_t d = 1; d <= rest; ++d) {
                    pd *= psi_;
                    s += pd * t.at(r - full * q - d, m_);
                }
                c[static_cast<std::size_t>(r)] = s;
            }
        }
        const std::int64_t anchor = left ? mx_.offset() : mx_.end() + n;
        double best = 0.0;
        if (order_) {
            // u is periodic with period lcm(q, order) on this tail
            const std::int64_t per = std::lcm(q, *order_);
            for (std::int64_t j = 0; j < per; ++j) {
                const std::int64_t i = left ? anchor - 1 - j : anchor + 1 + j;
                const Vec wv = std::pow(psi_, -static_cast<double>(i)) * c[static_cast<std::size_t>(floor_mod(i, q))];
                best = std::max(best, (inv_n * wv - y0_).norm());
            }
        } else {
            // phases psi^{-i} are dense on the circle: sup |e^{i a} v - y0| over a
            for (const auto& v : c) {
                const Vec vv = inv_n * v;
                const cplx ip = vv.dot(y0_);  // conj(vv) . y0
                const double s2 = vv.squaredNorm() + y0_.squaredNorm() + 2.0 * std::abs(ip);
                best = std::max(best, std::sqrt(std::max(0.0, s2)));
            }
        }
        return best;
    }

    SeqState mx_;
    cplx psi_;
    Vec y0_;
    bool sup_;
    int m_;
    std::optional<std::int64_t> order_;
};

[[nodiscard]] inline std::vector<std::int64_t> cesaro_sample_points(std::int64_t n_max, int count = 60) {
    std::vector<std::int64_t> ns;
    for (double v : logspace(1.0, static_cast<double>(n_max), count)) {
        const auto k = static_cast<std::int64_t>(std::llround(v));
        if (ns.empty() || k > ns.back()) ns.push_back(k);
    }
    if (ns.back() != n_max) ns.push_back(n_max);
    return ns;
}

/// `noise_per_n`: residuals r(n) <= noise_per_n * n are rounding in the running
/// window sums and count as zero.
[[nodiscard]] inline CesaroVerdict decide_cesaro(std::vector<std::pair<std::int64_t, double>> curve,
                                                 double noise_per_n = 0.0) {
    for (auto& [n, r] : curve)
        if (r <= noise_per_n * static_cast<double>(n)) r = 0.0;
    const std::int64_t n_max = curve.back().first;
    const double last = curve.back().second;
    const double first = curve.front().second;
    // rounding noise well below the acceptance threshold does not break monotonicity
    double scale = 0.0;
    for (const auto& pt : curve) scale = std::max(scale, pt.second);
    const double slack = 1e-12 * std::max(1.0, scale);
    bool monotone = true;
    double prev = kInf;
    for (const auto& [n, r] : curve) {
        if (n * 10 < n_max) continue;
        if (r > prev + slack) monotone = false;
        prev = r;
    }
    if (last <= std::max(1e-8, 10.0 / std::pow(static_cast<double>(n_max), 0.9)) && monotone)
        return CesaroVerdict::convergent;
    if (last >= 0.5 * first && last > 0.0) return CesaroVerdict::divergent;
    return CesaroVerdict::inconclusive;
}

[[nodiscard]] inline CesaroReport cesaro_classify(const CascadeSystem& sys, const CharacteristicFn& cf,
                                                  const SeqState& x0, std::int64_t n_max = 10000) {
    if (n_max < 10) throw Error(ErrorKind::InvalidArgument, "n_max must be at least 10");
    CesaroReport rep;
    rep.n_max = n_max;
    const Exponent p = sys.p;
    if (p.is_reflexive()) {
        rep.convergent = true;
        rep.verdict = CesaroVerdict::convergent;
        rep.limit_y0 = Vec::Zero(sys.m);
        rep.limit_state = SeqState(sys.m, 0, {}, {}, {}, p);
        return rep;
    }
    if (!cf.phi0) throw Error(ErrorKind::AssumptionViolated, "phi(0) is undefined");
    const cplx psi = *cf.phi0;
    const Mat mmat = sys.A1 * sys.A0.partialPivLu().inverse();
    const SeqState mx = x0.mapped(mmat);

    Vec y0 = Vec::Zero(sys.m);
    if (p.is_inf()) {
        // Cesaro mean of the gauge-frame left tail
        const TailRule& lt = mx.left_tail();
        const std::int64_t q = lt.period();
        if (!lt.is_zero() && std::abs(std::pow(psi, static_cast<double>(q)) - 1.0) <= 1e-9 * static_cast<double>(q)) {
            for (std::int64_t r = 0; r < q; ++r) y0 += std::pow(psi, -static_cast<double>(r)) * lt.at(r, sys.m);
            y0 /= static_cast<double>(q);
        }
    } else if (!x0.finitely_supported()) {
        throw Error(ErrorKind::InvalidArgument, "an l^1 state must have zero tails");
    }

    const CesaroAverager avg(mx, psi, y0, p.is_inf());
    // with psi a root of unity of order q the residual is modulated with period q,
    // so only whole periods are sampled
    const std::int64_t q = std::min<std::int64_t>(detail::root_of_unity_order(psi).value_or(1), n_max);
    std::vector<std::int64_t> ns;
    for (std::int64_t n : cesaro_sample_points(n_max)) {
        const std::int64_t nq = std::max(q, n / q * q);
        if (ns.empty() || nq > ns.back()) ns.push_back(nq);
    }
    for (std::int64_t n : ns) {
        const double r = avg.residual(n);
        rep.residual_curve.emplace_back(n, r);
        rep.sup_n_times_residual = std::max(rep.sup_n_times_residual, static_cast<double>(n) * r);
    }
    rep.verdict = decide_cesaro(rep.residual_curve, 1e3 * std::numeric_limits<double>::epsilon() * mx.sup_norm());
    rep.convergent = rep.verdict == CesaroVerdict::convergent;
    if (rep.convergent) {
        rep.limit_y0 = y0;
        if (y0.norm() == 0.0) {
            rep.limit_state = SeqState(sys.m, 0, {}, {}, {}, p);
        } else {
            const Vec z0 = limit_lift(sys, y0);
            const std::int64_t q = detail::root_of_unity_order(psi).value_or(1);
            std::vector<Vec> pat;
            for (std::int64_t r = 0; r < q; ++r) pat.push_back(std::pow(psi, static_cast<double>(r)) * z0);
            rep.limit_state = SeqState::periodic(sys.m, std::move(pat), p);
        }
    }
    return rep;
}

}  // namespace cascade
