#pragma once

// Complex polynomials and rational functions. Coefficients are stored in
// ascending degree; the zero polynomial has no coefficients and degree -1.

#include "cascade/core.hpp"

#include <algorithm>
#include <numeric>
#include <span>

namespace cascade {

inline constexpr int kMaxPolyDegree = 64;
/// Relative magnitude below which leading coefficients are dropped.
inline constexpr double kCoeffDropTol = 1e-13;
/// Cross-polynomial root matching tolerance, relative to coefficient scale.
inline constexpr double kRootClusterTol = 1e-8;

class Poly {
public:
    Poly() = default;

    explicit Poly(std::vector<cplx> coeffs, double drop_tol = kCoeffDropTol) : c_(std::move(coeffs)) {
        normalize(drop_tol);
    }

    Poly(std::initializer_list<cplx> coeffs) : Poly(std::vector<cplx>(coeffs)) {}

    [[nodiscard]] static Poly constant(cplx c) { return Poly(std::vector<cplx>{c}); }

    [[nodiscard]] static Poly from_roots(std::span<const cplx> roots, cplx lead = 1.0) {
        std::vector<cplx> c{lead};
        for (cplx z : roots) {
            std::vector<cplx> next(c.size() + 1, 0.0);
            for (std::size_t i = 0; i < c.size(); ++i) {
                next[i + 1] += c[i];
                next[i] -= z * c[i];
            }
            c = std::move(next);
        }
        return Poly(std::move(c), 0.0);
    }

    [[nodiscard]] int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    [[nodiscard]] bool is_zero() const noexcept { return c_.empty(); }
    [[nodiscard]] const std::vector<cplx>& coeffs() const noexcept { return c_; }
    [[nodiscard]] cplx leading() const { return c_.empty() ? cplx(0.0) : c_.back(); }
    [[nodiscard]] cplx coeff(int i) const {
        return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(i)] : cplx(0.0);
    }

    [[nodiscard]] double max_abs_coeff() const noexcept {
        double s = 0.0;
        for (cplx a : c_) s = std::max(s, std::abs(a));
        return s;
    }

    /// Horner evaluation.
    [[nodiscard]] cplx operator()(cplx z) const noexcept {
        cplx acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    /// sum |c_i| |z|^i, the natural scale for rounding errors in Horner.
    [[nodiscard]] double abs_scale(double r) const noexcept {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
        return acc;
    }

    [[nodiscard]] Poly derivative() const {
        if (c_.size() <= 1) return {};
        std::vector<cplx> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
        return Poly(std::move(d), 0.0);
    }

    /// Roots via the eigenvalues of the companion matrix.
    [[nodiscard]] std::vector<cplx> roots() const {
        const int n = degree();
        if (n <= 0) return {};
        if (n == 1) return {-c_[0] / c_[1]};
        Mat comp = Mat::Zero(n, n);
        for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
        for (int i = 0; i < n; ++i) comp(i, n - 1) = -c_[static_cast<std::size_t>(i)] / c_.back();
        return eigenvalues(comp);
    }

    /// Quotient of division by a monic divisor; the remainder is discarded.
    [[nodiscard]] Poly divide_monic(const Poly& divisor) const {
        const int dn = divisor.degree();
        if (dn < 0) throw Error(ErrorKind::DegenerateDenominator, "division by zero polynomial");
        if (degree() < dn) return {};
        std::vector<cplx> rem = c_;
        std::vector<cplx> q(static_cast<std::size_t>(degree() - dn + 1), 0.0);
        const cplx lead = divisor.leading();
        for (int k = degree() - dn; k >= 0; --k) {
            const cplx f = rem[static_cast<std::size_t>(k + dn)] / lead;
            q[static_cast<std::size_t>(k)] = f;
            for (int j = 0; j <= dn; ++j) rem[static_cast<std::size_t>(k + j)] -= f * divisor.coeff(j);
        }
        return Poly(std::move(q), 0.0);
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<cplx> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return Poly(std::move(c));
    }
    friend Poly operator-(const Poly& a, const Poly& b) { return a + (-1.0) * b; }
    friend Poly operator*(cplx s, const Poly& a) {
        std::vector<cplx> c = a.c_;
        for (auto& x : c) x *= s;
        return Poly(std::move(c), 0.0);
    }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<cplx> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Poly(std::move(c), 0.0);
    }

private:
    void normalize(double drop_tol) {
        const double scale = max_abs_coeff();
        while (!c_.empty() && (std::abs(c_.back()) <= drop_tol * scale || c_.back() == 0.0)) c_.pop_back();
        if (degree() > kMaxPolyDegree)
            throw Error(ErrorKind::DegreeTooLarge, "polynomial degree " + std::to_string(degree()) + " exceeds 64");
    }

    std::vector<cplx> c_;
};

/// Real polynomial, ascending coefficients.
class RealPoly {
public:
    RealPoly() = default;
    explicit RealPoly(std::vector<double> c) : c_(std::move(c)) {}

    [[nodiscard]] const std::vector<double>& coeffs() const noexcept { return c_; }
    [[nodiscard]] int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    [[nodiscard]] double coeff(int i) const {
        return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(i)] : 0.0;
    }
    [[nodiscard]] double operator()(double s) const noexcept {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
        return acc;
    }
    [[nodiscard]] double max_abs_coeff() const noexcept {
        double m = 0.0;
        for (double a : c_) m = std::max(m, std::abs(a));
        return m;
    }

private:
    std::vector<double> c_;
};

class RatFun {
public:
    RatFun() : num_(), den_(Poly::constant(1.0)) {}

    RatFun(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw Error(ErrorKind::DegenerateDenominator, "denominator is the zero polynomial");
    }

    [[nodiscard]] const Poly& num() const noexcept { return num_; }
    [[nodiscard]] const Poly& den() const noexcept { return den_; }

    [[nodiscard]] cplx operator()(cplx z) const { return num_(z) / den_(z); }

    /// f'(z) by the quotient rule.
    [[nodiscard]] cplx derivative_at(cplx z) const {
        const cplx q = den_(z);
        return (num_.derivative()(z) * q - num_(z) * den_.derivative()(z)) / (q * q);
    }

    [[nodiscard]] std::vector<cplx> poles() const { return den_.roots(); }

    /// Taylor coefficients of f around z0 up to order n (inclusive).
    [[nodiscard]] std::vector<cplx> taylor(cplx z0, int n) const {
        const std::vector<cplx> ns = shift_coeffs(num_, z0, n);
        const std::vector<cplx> ds = shift_coeffs(den_, z0, n);
        std::vector<cplx> out(static_cast<std::size_t>(n + 1), 0.0);
        if (ds[0] == 0.0) throw Error(ErrorKind::DomainError, "Taylor expansion at a pole");
        for (int k = 0; k <= n; ++k) {
            cplx acc = ns[static_cast<std::size_t>(k)];
            for (int j = 1; j <= k; ++j) acc -= ds[static_cast<std::size_t>(j)] * out[static_cast<std::size_t>(k - j)];
            out[static_cast<std::size_t>(k)] = acc / ds[0];
        }
        return out;
    }

    /// Coefficients of p(z0 + h) in powers of h, truncated at order n.
    [[nodiscard]] static std::vector<cplx> shift_coeffs(const Poly& p, cplx z0, int n) {
        std::vector<cplx> a = p.coeffs();
        const int d = p.degree();
        std::vector<cplx> out(static_cast<std::size_t>(n + 1), 0.0);
        // Repeated Horner (Taylor shift): after pass k, a[k] is the k-th coefficient.
        for (int k = 0; k <= d; ++k) {
            for (int i = d - 1; i >= k; --i) a[static_cast<std::size_t>(i)] += z0 * a[static_cast<std::size_t>(i + 1)];
            if (k <= n) out[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)];
        }
        return out;
    }

private:
    Poly num_;
    Poly den_;
};

namespace detail {

struct RootCluster {
    cplx center;
    int multiplicity;
};

/// Groups numerically computed roots into clusters. A k-fold root splits into
/// k roots spread by about eps^(1/k); their mean is accurate to about eps.
[[nodiscard]] inline std::vector<RootCluster> cluster_roots(const std::vector<cplx>& roots, double scale) {
    std::vector<RootCluster> out;
    std::vector<bool> used(roots.size(), false);
    const double base = 1e-4 * std::max(1.0, scale);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> members{i};
        used[i] = true;
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::size_t j = 0; j < roots.size(); ++j) {
                if (used[j]) continue;
                for (std::size_t k : members) {
                    if (std::abs(roots[j] - roots[k]) <= base) {
                        members.push_back(j);
                        used[j] = true;
                        grew = true;
                        break;
                    }
                }
            }
        }
        cplx c = 0.0;
        for (std::size_t k : members) c += roots[k];
        out.push_back({c / static_cast<double>(members.size()), static_cast<int>(members.size())});
    }
    return out;
}

[[nodiscard]] inline double root_scale(const std::vector<cplx>& r) {
    double s = 0.0;
    for (cplx z : r) s = std::max(s, std::abs(z));
    return s;
}

}  // namespace detail

/// Cancels common roots of num and den. The denominator is returned monic.
[[nodiscard]] inline RatFun reduce_coprime(const Poly& num, const Poly& den) {
    if (den.is_zero() || den.max_abs_coeff() == 0.0)
        throw Error(ErrorKind::DegenerateDenominator, "denominator is (numerically) the zero polynomial");
    const cplx dl = den.leading();
    if (num.is_zero()) return RatFun(Poly{}, Poly::constant(1.0));
    Poly n = (1.0 / dl) * num;
    Poly d = (1.0 / dl) * den;
    if (n.degree() <= 0 || d.degree() <= 0) return RatFun(n, d);

    const auto nr = n.roots();
    const auto dr = d.roots();
    const double scale = std::max({1.0, detail::root_scale(nr), detail::root_scale(dr)});
    auto nc = detail::cluster_roots(nr, scale);
    auto dc = detail::cluster_roots(dr, scale);

    const double match_tol = kRootClusterTol * std::max({1.0, n.max_abs_coeff(), d.max_abs_coeff()});
    std::vector<cplx> common;
    for (auto& a : nc) {
        for (auto& b : dc) {
            if (a.multiplicity == 0 || b.multiplicity == 0) continue;
            if (std::abs(a.center - b.center) <= match_tol * scale) {
                const int k = std::min(a.multiplicity, b.multiplicity);
                const cplx z = 0.5 * (a.center + b.center);
                for (int i = 0; i < k; ++i) common.push_back(z);
                a.multiplicity -= k;
                b.multiplicity -= k;
            }
        }
    }
    if (common.empty()) return RatFun(n, d);
    const Poly g = Poly::from_roots(common);
    return RatFun(n.divide_monic(g), d.divide_monic(g));
}

[[nodiscard]] inline RatFun reduce_coprime(const RatFun& f) { return reduce_coprime(f.num(), f.den()); }

/// Sylvester resultant magnitude relative to coefficient scale; used as a coprimality witness.
[[nodiscard]] inline double relative_resultant(const Poly& a, const Poly& b) {
    const int m = a.degree(), n = b.degree();
    if (m < 0 || n < 0) return 0.0;
    if (m == 0 || n == 0) return 1.0;
    const int size = m + n;
    Mat s = Mat::Zero(size, size);
    const double sa = a.max_abs_coeff(), sb = b.max_abs_coeff();
    for (int r = 0; r < n; ++r)
        for (int j = 0; j <= m; ++j) s(r, r + j) = a.coeff(m - j) / sa;
    for (int r = 0; r < m; ++r)
        for (int j = 0; j <= n; ++j) s(n + r, r + j) = b.coeff(n - j) / sb;
    return std::abs(s.partialPivLu().determinant());
}

/// r(s) = |q(is)|^2 - |p(is)|^2 as a real polynomial in s.
[[nodiscard]] inline RealPoly modulus_diff_on_axis(const RatFun& f) {
    auto on_axis = [](const Poly& p) {
        std::vector<cplx> a(p.coeffs().size());
        cplx ik = 1.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            a[k] = p.coeffs()[k] * ik;
            ik *= cplx(0.0, 1.0);
        }
        return a;
    };
    auto abs_sq = [](const std::vector<cplx>& a) {
        std::vector<cplx> out(a.empty() ? 0 : 2 * a.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a.size(); ++j) out[i + j] += a[i] * std::conj(a[j]);
        return out;
    };
    const auto qq = abs_sq(on_axis(f.den()));
    const auto pp = abs_sq(on_axis(f.num()));
    std::vector<cplx> r(std::max(qq.size(), pp.size()), 0.0);
    for (std::size_t i = 0; i < qq.size(); ++i) r[i] += qq[i];
    for (std::size_t i = 0; i < pp.size(); ++i) r[i] -= pp[i];

    double scale = 0.0, resid = 0.0;
    for (cplx c : r) scale = std::max(scale, std::abs(c));
    for (cplx c : r) resid = std::max(resid, std::abs(c.imag()));
    if (resid > 1e-12 * std::max(scale, 1.0))
        throw Error(ErrorKind::NonRealResidue, "imaginary residue " + std::to_string(resid) + " in |q(is)|^2-|p(is)|^2");
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i].real();
    while (!out.empty() && out.back() == 0.0) out.pop_back();
    return RealPoly(std::move(out));
}

/// rho(x) = |q(x)|^2 - |p(x)|^2 for real x, as a real polynomial.
[[nodiscard]] inline RealPoly modulus_diff_on_real_line(const RatFun& f) {
    auto abs_sq = [](const std::vector<cplx>& a) {
        std::vector<cplx> out(a.empty() ? 0 : 2 * a.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a.size(); ++j) out[i + j] += a[i] * std::conj(a[j]);
        return out;
    };
    const auto qq = abs_sq(f.den().coeffs());
    const auto pp = abs_sq(f.num().coeffs());
    std::vector<double> r(std::max(qq.size(), pp.size()), 0.0);
    for (std::size_t i = 0; i < qq.size(); ++i) r[i] += qq[i].real();
    for (std::size_t i = 0; i < pp.size(); ++i) r[i] -= pp[i].real();
    return RealPoly(std::move(r));
}

}  // namespace cascade
