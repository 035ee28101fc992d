#pragma once

// Toeplitz blocks of the semigroup: (T(t)x)_k = sum_l B_l(t) x_{k-l}. The
// first block column of exp(t M), M block lower-bidiagonal with A0 on the
// diagonal and A1 below it, is computed in the algebra of truncated block
// power series, where truncation is exact for the leading blocks.

#include "cascade/system.hpp"

namespace cascade {

inline constexpr int kDefaultMaxBlocks = 20000;

namespace detail {

/// n blocks of size m x m, column-major, block l at offset l*m*m. Blocks at
/// index >= nnz are known to be zero.
struct Series {
    int m = 1;
    int n = 1;
    int nnz = 0;
    std::vector<cplx> d;

    Series(int m_, int n_) : m(m_), n(n_), nnz(0), d(static_cast<std::size_t>(m_) * m_ * n_, 0.0) {}

    [[nodiscard]] cplx* block(int l) { return d.data() + static_cast<std::size_t>(l) * m * m; }
    [[nodiscard]] const cplx* block(int l) const { return d.data() + static_cast<std::size_t>(l) * m * m; }

    static Series identity(int m, int n) {
        Series s(m, n);
        for (int i = 0; i < m; ++i) s.d[static_cast<std::size_t>(i) * m + i] = 1.0;
        s.nnz = 1;
        return s;
    }
};

/// c += a * b for m x m column-major blocks.
inline void block_gemm(int m, const cplx* a, const cplx* b, cplx* c) {
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
            const cplx bkj = b[k + j * m];
            if (bkj == 0.0) continue;
            const cplx* ak = a + k * m;
            cplx* cj = c + j * m;
            for (int i = 0; i < m; ++i) cj[i] += ak[i] * bkj;
        }
}

[[nodiscard]] inline Series mul(const Series& a, const Series& b) {
    Series c(a.m, a.n);
    const int n = a.n;
    for (int l = 0; l < n; ++l) {
        const int jlo = std::max(0, l - b.nnz + 1), jhi = std::min(l, a.nnz - 1);
        for (int j = jlo; j <= jhi; ++j) block_gemm(a.m, a.block(j), b.block(l - j), c.block(l));
    }
    c.nnz = std::min(n, a.nnz + b.nnz - 1);
    if (a.nnz == 0 || b.nnz == 0) c.nnz = 0;
    return c;
}

/// sum_i coef_i * s_i (+ c0 * I).
[[nodiscard]] inline Series lincomb(std::initializer_list<std::pair<double, const Series*>> terms, int m, int n,
                                    double c0 = 0.0) {
    Series out(m, n);
    for (auto [c, s] : terms) {
        const std::size_t len = static_cast<std::size_t>(s->nnz) * m * m;
        for (std::size_t i = 0; i < len; ++i) out.d[i] += c * s->d[i];
        out.nnz = std::max(out.nnz, s->nnz);
    }
    if (c0 != 0.0) {
        for (int i = 0; i < m; ++i) out.d[static_cast<std::size_t>(i) * m + i] += c0;
        out.nnz = std::max(out.nnz, 1);
    }
    return out;
}

/// x with d * x = rhs, by block forward substitution.
[[nodiscard]] inline Series solve(const Series& dd, const Series& rhs) {
    const int m = dd.m, n = dd.n;
    Eigen::Map<const Mat> d0(dd.block(0), m, m);
    const auto lu = d0.partialPivLu();
    Series x(m, n);
    std::vector<cplx> acc(static_cast<std::size_t>(m) * m);
    for (int l = 0; l < n; ++l) {
        std::copy(rhs.block(l), rhs.block(l) + m * m, acc.begin());
        const int jhi = std::min(l, dd.nnz - 1);
        std::vector<cplx> tmp(static_cast<std::size_t>(m) * m, 0.0);
        for (int j = 1; j <= jhi; ++j) block_gemm(m, dd.block(j), x.block(l - j), tmp.data());
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] -= tmp[i];
        Eigen::Map<Mat> xl(x.block(l), m, m);
        xl = lu.solve(Eigen::Map<const Mat>(acc.data(), m, m));
    }
    x.nnz = n;
    return x;
}

[[nodiscard]] inline double norm1(const Series& s) {
    double best = 0.0;
    for (int c = 0; c < s.m; ++c) {
        double col = 0.0;
        for (int l = 0; l < s.nnz; ++l)
            for (int r = 0; r < s.m; ++r) col += std::abs(s.block(l)[r + c * s.m]);
        best = std::max(best, col);
    }
    return best;
}

/// exp of the series by Pade(13) scaling and squaring.
[[nodiscard]] inline Series expm(Series x) {
    static constexpr double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                     1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                     670442572800.0,      33522128640.0,       1323241920.0,
                                     40840800.0,          960960.0,            16380.0,
                                     182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;
    const int m = x.m, n = x.n;
    const double nrm = norm1(x);
    int s = 0;
    if (nrm > theta13) s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    if (s > 0) {
        const double f = std::ldexp(1.0, -s);
        for (auto& v : x.d) v *= f;
    }
    const Series x2 = mul(x, x);
    const Series x4 = mul(x2, x2);
    const Series x6 = mul(x4, x2);
    const Series u_inner = lincomb({{b[13], &x6}, {b[11], &x4}, {b[9], &x2}}, m, n);
    const Series u_a = mul(x6, u_inner);
    const Series u_b = lincomb({{1.0, &u_a}, {b[7], &x6}, {b[5], &x4}, {b[3], &x2}}, m, n, b[1]);
    const Series u = mul(x, u_b);
    const Series v_inner = lincomb({{b[12], &x6}, {b[10], &x4}, {b[8], &x2}}, m, n);
    const Series v_a = mul(x6, v_inner);
    const Series v = lincomb({{1.0, &v_a}, {b[6], &x6}, {b[4], &x4}, {b[2], &x2}}, m, n, b[0]);
    const Series p = lincomb({{1.0, &v}, {1.0, &u}}, m, n);
    const Series q = lincomb({{1.0, &v}, {-1.0, &u}}, m, n);
    Series r = solve(q, p);
    for (int i = 0; i < s; ++i) r = mul(r, r);
    return r;
}

}  // namespace detail

/// Dense matrix exponential (Pade 13 with scaling and squaring).
[[nodiscard]] inline Mat expm(const Mat& a) {
    const int m = static_cast<int>(a.rows());
    detail::Series s(m, 1);
    Eigen::Map<Mat>(s.block(0), m, m) = a;
    s.nnz = 1;
    const auto r = detail::expm(std::move(s));
    return Eigen::Map<const Mat>(r.block(0), m, m);
}

struct BlockKernel {
    double t = 0.0;
    std::vector<Mat> blocks;
    double tail_bound = 0.0;

    [[nodiscard]] int L() const noexcept { return static_cast<int>(blocks.size()) - 1; }
};

/// Computes Toeplitz kernels and bounds on their discarded tails.
///
/// With phi available, B_l(t) = (1/2 pi i) \oint e^{lambda t} phi^{l-1} R A1 R dlambda
/// for l >= 1, which over a circle enclosing sigma(A0) with |phi| < 1 gives
///   sum_{l>L} ||B_l|| <= (1/2 pi) \oint e^{t Re lambda} ||R A1 R|| |phi|^L / (1 - |phi|) |dlambda|.
/// The crude Duhamel estimate e^{t mu} (a t)^{L+1}/(L+1)! / (1 - a t/(L+2)),
/// mu the logarithmic norm of A0 and a = ||A1||, is always available.
class KernelBuilder {
public:
    explicit KernelBuilder(CascadeSystem sys) : sys_(std::move(sys)) {
        try {
            cf_ = extract_char_fn(sys_);
        } catch (const Error&) {
            cf_.reset();
        }
        const auto eig = eigenvalues(sys_.A0);
        for (cplx e : eig) center_ += e;
        center_ /= static_cast<double>(eig.size());
        for (cplx e : eig) spread_ = std::max(spread_, std::abs(e - center_));
        mu_ = log_norm2(sys_.A0);
        a_ = norm2(sys_.A1);
    }

    [[nodiscard]] const CascadeSystem& system() const noexcept { return sys_; }
    [[nodiscard]] const std::optional<CharacteristicFn>& char_fn() const noexcept { return cf_; }

    /// Smallest L (<= max_blocks) with tail bound <= eps; the bound is returned through `bound`.
    [[nodiscard]] int required_L(double t, double eps, double* bound = nullptr, int max_blocks = kDefaultMaxBlocks) const {
        validate(t, eps);
        if (t == 0.0 || a_ == 0.0) {
            if (bound) *bound = 0.0;
            return 0;
        }
        const double log_eps = std::log(eps);
        // upper end from the crude bound
        int hi = std::max(1, static_cast<int>(std::ceil(a_ * t)));
        while (hi < max_blocks && log_crude(t, hi) > log_eps) hi = std::min(max_blocks, 2 * hi);
        Contour contour(*this, t, hi);
        auto log_bound = [&](int L) { return std::min(log_crude(t, L), contour.log_bound(L)); };
        if (log_bound(hi) > log_eps) {
            if (bound) *bound = std::exp(log_bound(hi));
            return hi;
        }
        int lo = -1;  // log_bound(lo) > log_eps (virtual at -1)
        while (hi - lo > 1) {
            const int mid = lo + (hi - lo) / 2;
            if (log_bound(mid) <= log_eps) hi = mid;
            else lo = mid;
        }
        if (bound) *bound = std::exp(log_bound(hi));
        return hi;
    }

    /// Tail bound for a given L (min of both estimates).
    [[nodiscard]] double tail_bound(double t, int L) const {
        validate(t, 1.0);
        if (t == 0.0 || a_ == 0.0) return 0.0;
        Contour contour(*this, t, L);
        return std::exp(std::min(log_crude(t, L), contour.log_bound(L)));
    }

    [[nodiscard]] BlockKernel build(double t, double eps, int max_blocks = kDefaultMaxBlocks) const {
        double bound = 0.0;
        const int L = required_L(t, eps, &bound, max_blocks);
        return build_with_L(t, L, bound);
    }

    [[nodiscard]] BlockKernel build_with_L(double t, int L, double bound) const {
        const int m = sys_.m;
        BlockKernel k;
        k.t = t;
        k.tail_bound = bound;
        if (t == 0.0) {
            k.blocks.push_back(Mat::Identity(m, m));
            for (int l = 1; l <= L; ++l) k.blocks.push_back(Mat::Zero(m, m));
            return k;
        }
        detail::Series x(m, L + 1);
        Eigen::Map<Mat>(x.block(0), m, m) = t * sys_.A0;
        x.nnz = 1;
        if (L >= 1) {
            Eigen::Map<Mat>(x.block(1), m, m) = t * sys_.A1;
            x.nnz = 2;
        }
        const auto e = detail::expm(std::move(x));
        k.blocks.reserve(static_cast<std::size_t>(L + 1));
        for (int l = 0; l <= L; ++l) k.blocks.emplace_back(Eigen::Map<const Mat>(e.block(l), m, m));
        return k;
    }

    /// sum_l B_l(t) z^l = exp(t (A0 + z A1)).
    [[nodiscard]] Mat symbol(double t, cplx z) const { return expm(t * (sys_.A0 + z * sys_.A1)); }

    /// S_j = sum_{l = j mod q} B_l(t), j = 0..q-1, by a discrete Fourier transform of the symbol.
    [[nodiscard]] std::vector<Mat> phase_sums(double t, std::int64_t q) const {
        const int m = sys_.m;
        std::vector<Mat> sym(static_cast<std::size_t>(q));
        for (std::int64_t r = 0; r < q; ++r)
            sym[static_cast<std::size_t>(r)] = symbol(t, std::polar(1.0, 2.0 * kPi * static_cast<double>(r) / static_cast<double>(q)));
        std::vector<Mat> out(static_cast<std::size_t>(q), Mat::Zero(m, m));
        for (std::int64_t j = 0; j < q; ++j) {
            for (std::int64_t r = 0; r < q; ++r)
                out[static_cast<std::size_t>(j)] +=
                    std::polar(1.0, -2.0 * kPi * static_cast<double>((j * r) % q) / static_cast<double>(q)) * sym[static_cast<std::size_t>(r)];
            out[static_cast<std::size_t>(j)] /= static_cast<double>(q);
        }
        return out;
    }

private:
    static void validate(double t, double eps) {
        if (!(t >= 0.0)) throw Error(ErrorKind::TimeNegative, "time must be nonnegative");
        if (!(eps > 0.0)) throw Error(ErrorKind::EpsilonNonpositive, "tolerance must be positive");
    }

    [[nodiscard]] double log_crude(double t, int L) const {
        const double at = a_ * t;
        if (static_cast<double>(L) + 2.0 <= at) return kInf;
        return t * mu_ + (L + 1) * std::log(at) - std::lgamma(L + 2.0) - std::log1p(-at / (L + 2.0));
    }

    /// Quadrature data of the contour estimate on a family of circles.
    class Contour {
    public:
        Contour(const KernelBuilder& kb, double t, int l_max) : kb_(kb), t_(t), l_max_(l_max) {
            if (!kb.cf_) return;
            const double base = kb.spread_ + 0.02 * (1.0 + kb.spread_);
            const double top =
                kb.spread_ + 2.0 + norm2(kb.sys_.A0) + kb.a_ + 4.0 * (l_max + 1) / std::max(t, 1e-9);
            radii_ = logspace(base, std::max(top, 2.0 * base), 48);
            coarse_a_.resize(radii_.size());
            coarse_b_.resize(radii_.size());
            for (std::size_t i = 0; i < radii_.size(); ++i) {
                std::vector<double> a, b;
                nodes(radii_[i], 64, a, b);
                coarse_a_[i] = a.empty() ? kInf : *std::max_element(a.begin(), a.end());
                coarse_b_[i] = b.empty() ? kInf : *std::max_element(b.begin(), b.end());
            }
            fine_.resize(radii_.size());
        }

        [[nodiscard]] double log_bound(int L) {
            if (radii_.empty()) return kInf;
            std::size_t best = 0;
            double best_val = kInf;
            for (std::size_t i = 0; i < radii_.size(); ++i) {
                if (!std::isfinite(coarse_a_[i]) || coarse_b_[i] >= 0.0) continue;
                const double v = coarse_a_[i] + L * coarse_b_[i];
                if (v < best_val) {
                    best_val = v;
                    best = i;
                }
            }
            if (!std::isfinite(best_val)) return kInf;
            double out = kInf;
            const std::size_t lo = best >= 2 ? best - 2 : 0, hi = std::min(radii_.size() - 1, best + 2);
            for (std::size_t i = lo; i <= hi; ++i) out = std::min(out, fine_bound(i, L));
            return out;
        }

    private:
        /// a_j = t Re(lambda) + log(rho ||R A1 R||_F) - log(1 - |phi|), b_j = log|phi| at N nodes.
        void nodes(double rho, int n, std::vector<double>& a, std::vector<double>& b) const {
            const auto& sys = kb_.sys_;
            const int m = sys.m;
            a.resize(static_cast<std::size_t>(n));
            b.resize(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                const cplx z = kb_.center_ + rho * std::polar(1.0, 2.0 * kPi * j / n);
                const Mat shifted = z * Mat::Identity(m, m) - sys.A0;
                const auto lu = shifted.partialPivLu();
                const Mat ra1r = lu.solve(sys.A1 * lu.inverse());
                const double ph = std::abs((*kb_.cf_)(z));
                if (!(ph < 1.0)) {
                    a.clear();
                    b.clear();
                    return;
                }
                a[static_cast<std::size_t>(j)] = t_ * z.real() + std::log(rho * ra1r.norm()) - std::log1p(-ph);
                b[static_cast<std::size_t>(j)] = std::log(ph);
            }
        }

        [[nodiscard]] double fine_bound(std::size_t i, int L) {
            auto& f = fine_[i];
            if (!f.ready) {
                const double rho = radii_[i];
                const int n = std::min(1 << 17, std::max(256, 2 * static_cast<int>(std::ceil(t_ * rho)) + 2 * l_max_ + 64));
                nodes(rho, n, f.a, f.b);
                f.ready = true;
            }
            if (f.a.empty()) return kInf;
            double mx = -kInf;
            for (std::size_t j = 0; j < f.a.size(); ++j) mx = std::max(mx, f.a[j] + L * f.b[j]);
            double s = 0.0;
            for (std::size_t j = 0; j < f.a.size(); ++j) s += std::exp(f.a[j] + L * f.b[j] - mx);
            return mx + std::log(s / static_cast<double>(f.a.size()));
        }

        struct Fine {
            bool ready = false;
            std::vector<double> a, b;
        };

        const KernelBuilder& kb_;
        double t_;
        int l_max_;
        std::vector<double> radii_;
        std::vector<double> coarse_a_, coarse_b_;
        std::vector<Fine> fine_;
    };

    CascadeSystem sys_;
    std::optional<CharacteristicFn> cf_;
    cplx center_ = 0.0;
    double spread_ = 0.0;
    double mu_ = 0.0;
    double a_ = 0.0;
};

[[nodiscard]] inline BlockKernel block_kernels(const CascadeSystem& sys, double t, double eps) {
    return KernelBuilder(sys).build(t, eps);
}

}  // namespace cascade
