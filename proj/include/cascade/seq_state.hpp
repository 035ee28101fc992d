#pragma once

// Doubly infinite block sequences (x_k)_{k in Z} with finitely many free
// blocks. Outside the core window the sequence follows a periodic rule whose
// phase is anchored to the absolute index: x_k = pattern[k mod q]. An empty
// pattern is the zero tail, a single block is a constant tail.

#include "cascade/core.hpp"

#include <algorithm>
#include <numeric>

namespace cascade {

inline constexpr std::int64_t kMaxTailPeriod = 4096;

[[nodiscard]] inline std::int64_t floor_mod(std::int64_t a, std::int64_t q) {
    const std::int64_t r = a % q;
    return r < 0 ? r + q : r;
}

struct TailRule {
    std::vector<Vec> pattern;

    [[nodiscard]] static TailRule zero() { return {}; }
    [[nodiscard]] static TailRule constant(Vec c) { return {{std::move(c)}}; }
    [[nodiscard]] static TailRule periodic(std::vector<Vec> p) { return {std::move(p)}; }

    [[nodiscard]] bool is_zero() const {
        return std::all_of(pattern.begin(), pattern.end(), [](const Vec& v) { return v.squaredNorm() == 0.0; });
    }
    [[nodiscard]] std::int64_t period() const { return pattern.empty() ? 1 : static_cast<std::int64_t>(pattern.size()); }
    [[nodiscard]] Vec at(std::int64_t k, int m) const {
        if (pattern.empty()) return Vec::Zero(m);
        return pattern[static_cast<std::size_t>(floor_mod(k, static_cast<std::int64_t>(pattern.size())))];
    }
    [[nodiscard]] double sup_norm() const {
        double s = 0.0;
        for (const auto& v : pattern) s = std::max(s, v.norm());
        return s;
    }
    [[nodiscard]] std::string kind() const {
        if (is_zero()) return "zero";
        return pattern.size() == 1 ? "constant" : "periodic";
    }
    /// Same rule with period q (a multiple of the current one).
    [[nodiscard]] TailRule expanded(std::int64_t q, int m) const {
        TailRule r;
        r.pattern.reserve(static_cast<std::size_t>(q));
        for (std::int64_t j = 0; j < q; ++j) r.pattern.push_back(at(j, m));
        return r;
    }
};

[[nodiscard]] inline std::int64_t common_period(std::int64_t a, std::int64_t b) {
    const std::int64_t q = std::lcm(a, b);
    if (q > kMaxTailPeriod) throw Error(ErrorKind::InvalidArgument, "combined tail period exceeds 4096");
    return q;
}

class SeqState {
public:
    SeqState() = default;
    SeqState(int m, std::int64_t offset, std::vector<Vec> core, TailRule left = {}, TailRule right = {},
             Exponent p = Exponent::one())
        : m_(m), offset_(offset), core_(std::move(core)), left_(std::move(left)), right_(std::move(right)), p_(p) {
        auto check = [&](const Vec& v) {
            if (v.size() != m_) throw Error(ErrorKind::InvalidArgument, "block of wrong dimension in sequence state");
        };
        for (const auto& v : core_) check(v);
        for (const auto& v : left_.pattern) check(v);
        for (const auto& v : right_.pattern) check(v);
        if (static_cast<std::int64_t>(left_.pattern.size()) > kMaxTailPeriod ||
            static_cast<std::int64_t>(right_.pattern.size()) > kMaxTailPeriod)
            throw Error(ErrorKind::InvalidArgument, "tail period exceeds 4096");
    }

    /// x = v at index k, zero elsewhere.
    [[nodiscard]] static SeqState delta(int m, std::int64_t k, const Vec& v, Exponent p = Exponent::one()) {
        return SeqState(m, k, {v}, {}, {}, p);
    }
    [[nodiscard]] static SeqState constant(int m, const Vec& c, Exponent p = Exponent::inf()) {
        return SeqState(m, 0, {}, TailRule::constant(c), TailRule::constant(c), p);
    }
    [[nodiscard]] static SeqState periodic(int m, std::vector<Vec> pattern, Exponent p = Exponent::inf()) {
        TailRule r = TailRule::periodic(std::move(pattern));
        return SeqState(m, 0, {}, r, r, p);
    }

    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] std::int64_t offset() const noexcept { return offset_; }
    [[nodiscard]] std::int64_t end() const noexcept { return offset_ + static_cast<std::int64_t>(core_.size()); }
    [[nodiscard]] const std::vector<Vec>& core() const noexcept { return core_; }
    [[nodiscard]] const TailRule& left_tail() const noexcept { return left_; }
    [[nodiscard]] const TailRule& right_tail() const noexcept { return right_; }
    [[nodiscard]] Exponent exponent() const noexcept { return p_; }
    [[nodiscard]] bool finitely_supported() const { return left_.is_zero() && right_.is_zero(); }

    [[nodiscard]] SeqState with_exponent(Exponent p) const {
        SeqState s = *this;
        s.p_ = p;
        return s;
    }

    [[nodiscard]] Vec at(std::int64_t k) const {
        if (k < offset_) return left_.at(k, m_);
        if (k >= end()) return right_.at(k, m_);
        return core_[static_cast<std::size_t>(k - offset_)];
    }

    /// Same sequence with the core window widened to contain [lo, hi).
    [[nodiscard]] SeqState widened(std::int64_t lo, std::int64_t hi) const {
        const std::int64_t a = std::min(lo, offset_), b = std::max(hi, end());
        std::vector<Vec> c;
        c.reserve(static_cast<std::size_t>(b - a));
        for (std::int64_t k = a; k < b; ++k) c.push_back(at(k));
        return SeqState(m_, a, std::move(c), left_, right_, p_);
    }

    /// Drops core blocks that agree with the adjacent tail rule.
    [[nodiscard]] SeqState trimmed(double tol = 0.0) const {
        std::int64_t a = offset_, b = end();
        while (a < b && (core_[static_cast<std::size_t>(a - offset_)] - left_.at(a, m_)).norm() <= tol) ++a;
        while (b > a && (core_[static_cast<std::size_t>(b - 1 - offset_)] - right_.at(b - 1, m_)).norm() <= tol) --b;
        std::vector<Vec> c(core_.begin() + (a - offset_), core_.begin() + (b - offset_));
        return SeqState(m_, a, std::move(c), left_, right_, p_);
    }

    /// (S^j x)_k = x_{k-j}.
    [[nodiscard]] SeqState shifted(std::int64_t j) const {
        auto shift_rule = [&](const TailRule& r) {
            TailRule out;
            const std::int64_t q = static_cast<std::int64_t>(r.pattern.size());
            for (std::int64_t i = 0; i < q; ++i) out.pattern.push_back(r.at(i - j, m_));
            return out;
        };
        return SeqState(m_, offset_ + j, core_, shift_rule(left_), shift_rule(right_), p_);
    }

    /// y_k = x_{c-k}.
    [[nodiscard]] SeqState reflected(std::int64_t c) const {
        auto refl_rule = [&](const TailRule& r) {
            TailRule out;
            const std::int64_t q = static_cast<std::int64_t>(r.pattern.size());
            for (std::int64_t i = 0; i < q; ++i) out.pattern.push_back(r.at(c - i, m_));
            return out;
        };
        std::vector<Vec> rc(core_.rbegin(), core_.rend());
        return SeqState(m_, c - (end() - 1), std::move(rc), refl_rule(right_), refl_rule(left_), p_);
    }

    /// Blockwise y_k = M x_k.
    [[nodiscard]] SeqState mapped(const Mat& mtx) const {
        if (mtx.cols() != m_) throw Error(ErrorKind::InvalidArgument, "matrix size does not match block size");
        const int mo = static_cast<int>(mtx.rows());
        auto map_rule = [&](const TailRule& r) {
            TailRule out;
            for (const auto& v : r.pattern) out.pattern.push_back(mtx * v);
            return out;
        };
        std::vector<Vec> c;
        c.reserve(core_.size());
        for (const auto& v : core_) c.push_back(mtx * v);
        return SeqState(mo, offset_, std::move(c), map_rule(left_), map_rule(right_), p_);
    }

    [[nodiscard]] SeqState scaled(cplx s) const { return mapped(s * Mat::Identity(m_, m_)); }

    friend SeqState operator+(const SeqState& a, const SeqState& b) {
        if (a.m_ != b.m_) throw Error(ErrorKind::InvalidArgument, "block sizes differ");
        const auto combine = [&](const TailRule& x, const TailRule& y) {
            if (x.pattern.empty()) return y;
            if (y.pattern.empty()) return x;
            const std::int64_t q = common_period(x.period(), y.period());
            TailRule r;
            for (std::int64_t i = 0; i < q; ++i) r.pattern.push_back(x.at(i, a.m_) + y.at(i, a.m_));
            return r;
        };
        const std::int64_t lo = std::min(a.offset_, b.offset_);
        const std::int64_t hi = std::max(a.end(), b.end());
        std::vector<Vec> c;
        if (hi > lo) {
            c.reserve(static_cast<std::size_t>(hi - lo));
            for (std::int64_t k = lo; k < hi; ++k) c.push_back(a.at(k) + b.at(k));
        }
        return SeqState(a.m_, lo, std::move(c),
                        combine(a.left_, b.left_), combine(a.right_, b.right_), a.p_);
    }
    friend SeqState operator-(const SeqState& a, const SeqState& b) { return a + b.scaled(-1.0); }

    /// Euclidean block norms combined by the l^p norm of the sequence space.
    [[nodiscard]] double norm() const { return norm(p_); }

    [[nodiscard]] double norm(Exponent p) const {
        if (p.is_inf()) {
            double s = std::max(left_.sup_norm(), right_.sup_norm());
            for (const auto& v : core_) s = std::max(s, v.norm());
            return s;
        }
        if (!finitely_supported()) return kInf;
        const double pv = p.value();
        double s = 0.0, scale = 0.0;
        for (const auto& v : core_) scale = std::max(scale, v.norm());
        if (scale == 0.0) return 0.0;
        for (const auto& v : core_) s += std::pow(v.norm() / scale, pv);
        return scale * std::pow(s, 1.0 / pv);
    }

    [[nodiscard]] double sup_norm() const { return norm(Exponent::inf()); }

private:
    int m_ = 1;
    std::int64_t offset_ = 0;
    std::vector<Vec> core_;
    TailRule left_;
    TailRule right_;
    Exponent p_;
};

}  // namespace cascade
