#pragma once

// Exact action of the semigroup, its generator and its resolvent on
// sequences with finite cores and periodic tails.

#include "cascade/kernel.hpp"
#include "cascade/parallel.hpp"
#include "cascade/seq_state.hpp"

namespace cascade {

struct SemigroupResult {
    SeqState state;
    double tail_bound = 0.0;  // per-block error is at most tail_bound * sup-norm of the input
    int L = 0;
};

namespace detail {

/// Pattern of sum_j S_j P[k - j] for phase sums S of period q (P of period q).
[[nodiscard]] inline TailRule convolve_periodic(const std::vector<Mat>& s, const TailRule& p, std::int64_t q, int m) {
    TailRule out;
    if (p.is_zero()) return out;
    for (std::int64_t r = 0; r < q; ++r) {
        Vec acc = Vec::Zero(m);
        for (std::int64_t j = 0; j < q; ++j) acc += s[static_cast<std::size_t>(j)] * p.at(r - j, m);
        out.pattern.push_back(std::move(acc));
    }
    return out;
}

[[nodiscard]] inline TailRule evolve_tail(const KernelBuilder& kb, double t, const TailRule& p, std::int64_t q, int m) {
    if (p.is_zero()) return {};
    if (q == 1) return TailRule::constant(kb.symbol(t, 1.0) * p.at(0, m));
    return convolve_periodic(kb.phase_sums(t, q), p, q, m);
}

[[nodiscard]] inline TailRule tail_difference(const TailRule& a, const TailRule& b, std::int64_t q, int m) {
    TailRule out;
    for (std::int64_t r = 0; r < q; ++r) out.pattern.push_back(a.at(r, m) - b.at(r, m));
    if (out.is_zero()) out.pattern.clear();
    return out;
}

}  // namespace detail

/// x(t) = T(t) x. Tails evolve in closed form through the symbol
/// exp(t (A0 + z A1)); the finite part uses the Toeplitz kernel, which
/// widens the core to the right by L blocks.
[[nodiscard]] inline SemigroupResult apply_semigroup(const KernelBuilder& kb, const SeqState& x, double t,
                                                     double eps = 1e-12) {
    if (!(t >= 0.0)) throw Error(ErrorKind::TimeNegative, "time must be nonnegative");
    const int m = x.m();
    const TailRule& pl = x.left_tail();
    const TailRule& pr = x.right_tail();
    const std::int64_t q = common_period(pl.period(), pr.period());
    const TailRule d = detail::tail_difference(pr, pl, q, m);

    const std::int64_t e = x.end();
    std::vector<Vec> dev;
    bool dev_zero = true;
    for (std::int64_t k = x.offset(); k < e; ++k) {
        dev.push_back(x.at(k) - pl.at(k, m));
        dev_zero = dev_zero && dev.back().squaredNorm() == 0.0;
    }

    SemigroupResult res;
    const TailRule bg = detail::evolve_tail(kb, t, pl, pl.period(), m);
    if (dev_zero && d.is_zero()) {
        res.state = SeqState(m, x.offset(), {}, bg, bg, x.exponent());
        return res;
    }

    const BlockKernel ker = kb.build(t, eps);
    res.L = ker.L();
    res.tail_bound = ker.tail_bound;
    const int L = ker.L();
    const TailRule dt = detail::evolve_tail(kb, t, d, q, m);

    std::vector<Vec> core;
    const std::int64_t lo = x.offset(), hi = e + L + 1;
    core.reserve(static_cast<std::size_t>(hi - lo));
    for (std::int64_t k = lo; k < hi; ++k) {
        Vec acc = bg.at(k, m);
        for (std::int64_t l = std::max<std::int64_t>(0, k - e + 1); l <= std::min<std::int64_t>(L, k - lo); ++l)
            acc += ker.blocks[static_cast<std::size_t>(l)] * dev[static_cast<std::size_t>(k - l - lo)];
        if (!d.is_zero())
            for (std::int64_t l = 0; l <= std::min<std::int64_t>(L, k - e); ++l)
                acc += ker.blocks[static_cast<std::size_t>(l)] * d.at(k - l, m);
        core.push_back(std::move(acc));
    }
    TailRule right = bg;
    if (!dt.pattern.empty()) {
        const std::int64_t qq = common_period(bg.period(), dt.period());
        right.pattern.clear();
        for (std::int64_t r = 0; r < qq; ++r) right.pattern.push_back(bg.at(r, m) + dt.at(r, m));
    }
    res.state = SeqState(m, lo, std::move(core), bg, std::move(right), x.exponent());
    return res;
}

[[nodiscard]] inline SemigroupResult apply_semigroup(const CascadeSystem& sys, const SeqState& x, double t,
                                                     double eps = 1e-12) {
    return apply_semigroup(KernelBuilder(sys), x, t, eps);
}

/// (A x)_k = A0 x_k + A1 x_{k-1}.
[[nodiscard]] inline SeqState apply_generator(const CascadeSystem& sys, const SeqState& x) {
    const int m = x.m();
    auto tail = [&](const TailRule& p) {
        TailRule out;
        const std::int64_t q = static_cast<std::int64_t>(p.pattern.size());
        for (std::int64_t r = 0; r < q; ++r) out.pattern.push_back(sys.A0 * p.at(r, m) + sys.A1 * p.at(r - 1, m));
        return out;
    };
    std::vector<Vec> core;
    for (std::int64_t k = x.offset(); k <= x.end(); ++k) core.push_back(sys.A0 * x.at(k) + sys.A1 * x.at(k - 1));
    return SeqState(m, x.offset(), std::move(core), tail(x.left_tail()), tail(x.right_tail()), x.exponent());
}

namespace detail {

/// G_k = sum_{j>=0} w^j x_{k-1-j} for |w| < 1, exact up to a transient cut at 1e-13 relative.
[[nodiscard]] inline SeqState causal_geometric(const SeqState& x, cplx w, std::int64_t max_extension = 50'000'000) {
    const int m = x.m();
    auto periodic_part = [&](const TailRule& p) {
        TailRule out;
        if (p.is_zero()) return out;
        const std::int64_t q = p.period();
        const cplx denom = 1.0 - std::pow(w, static_cast<double>(q));
        for (std::int64_t r = 0; r < q; ++r) {
            Vec acc = Vec::Zero(m);
            cplx wj = 1.0;
            for (std::int64_t j = 0; j < q; ++j) {
                acc += wj * p.at(r - 1 - j, m);
                wj *= w;
            }
            out.pattern.push_back(acc / denom);
        }
        return out;
    };
    const TailRule gl = periodic_part(x.left_tail());
    const TailRule gr = periodic_part(x.right_tail());
    const double scale = std::max({x.sup_norm(), gl.sup_norm(), gr.sup_norm(), 1e-300});

    std::vector<Vec> core;
    Vec g = gl.at(x.offset(), m);
    std::int64_t k = x.offset();
    for (; k <= x.end(); ++k) {
        core.push_back(g);
        g = x.at(k) + w * g;
    }
    // transient towards the right periodic solution decays like |w|^n
    for (std::int64_t n = 0;; ++n, ++k) {
        const double diff = (g - gr.at(k, m)).norm();
        if (diff <= 1e-13 * scale) break;
        if (n > max_extension) throw Error(ErrorKind::AccuracyExceeded, "geometric transient does not decay");
        core.push_back(g);
        g = x.at(k) + w * g;
    }
    return SeqState(m, x.offset(), std::move(core), gl, gr, x.exponent());
}

}  // namespace detail

/// R(lambda, A) x. For |phi| < 1 the series runs over predecessors, for
/// |phi| > 1 over successors.
[[nodiscard]] inline SeqState apply_resolvent(const CascadeSystem& sys, const CharacteristicFn& cf, const SeqState& x,
                                              cplx lambda) {
    const cplx w = cf(lambda);
    if (!std::isfinite(std::abs(w))) throw Error(ErrorKind::DomainError, "lambda is a pole of phi");
    if (std::abs(std::abs(w) - 1.0) <= 1e-9) throw Error(ErrorKind::OnLevelSet, "lambda lies on the level set |phi| = 1");
    const Mat r = resolvent(sys.A0, lambda);
    const Mat ra1r = r * sys.A1 * r;
    SeqState h;
    if (std::abs(w) < 1.0) {
        h = detail::causal_geometric(x, w);
    } else {
        // H_k = -(1/w) sum_{j>=0} w^{-j} x_{k+j}
        const SeqState g = detail::causal_geometric(x.reflected(0), 1.0 / w);
        h = g.reflected(1).scaled(-1.0 / w);
    }
    return x.mapped(r) + h.mapped(ra1r);
}

/// sup-norm of (lambda - A) y - x.
[[nodiscard]] inline double resolvent_identity_residual(const CascadeSystem& sys, const SeqState& x, const SeqState& y,
                                                        cplx lambda) {
    const SeqState lhs = y.scaled(lambda) - apply_generator(sys, y);
    return (lhs - x).sup_norm();
}

struct Trajectory {
    std::vector<double> times;
    std::vector<SeqState> states;
    std::vector<double> state_norms;
    std::vector<double> derivative_norms;
    std::vector<double> distance_norms;  // empty unless a reference state was given
    std::vector<double> tail_bounds;
};

[[nodiscard]] inline Trajectory simulate(const KernelBuilder& kb, const SeqState& x0, const std::vector<double>& times,
                                         const std::optional<SeqState>& z = std::nullopt, double eps = 1e-12,
                                         bool keep_states = true) {
    for (double t : times)
        if (!(t >= 0.0)) throw Error(ErrorKind::TimeNegative, "time must be nonnegative");
    Trajectory tr;
    tr.times = times;
    const std::size_t n = times.size();
    tr.states.resize(keep_states ? n : 0);
    tr.state_norms.resize(n);
    tr.derivative_norms.resize(n);
    tr.tail_bounds.resize(n);
    if (z) tr.distance_norms.resize(n);
    const Exponent p = x0.exponent();
    parallel_for(n, [&](std::size_t i) {
        auto r = apply_semigroup(kb, x0, times[i], eps);
        tr.state_norms[i] = r.state.norm(p);
        tr.derivative_norms[i] = apply_generator(kb.system(), r.state).norm(p);
        tr.tail_bounds[i] = r.tail_bound;
        if (z) tr.distance_norms[i] = (r.state - *z).norm(p);
        if (keep_states) tr.states[i] = std::move(r.state);
    }, 1);
    return tr;
}

}  // namespace cascade
