#pragma once

// The cascade system x_k' = A0 x_k + A1 x_{k-1} on l^p(C^m), its
// characteristic function phi with A1 R(lambda,A0) A1 = phi(lambda) A1, the
// resolvent growth parameter, eigenvectors at the level set and the lift L.

#include "cascade/core.hpp"
#include "cascade/poly.hpp"

#include <optional>

namespace cascade {

inline constexpr int kMaxBlockSize = 16;

struct CascadeSystem {
    int m = 1;
    Mat A0;
    Mat A1;
    Exponent p;

    CascadeSystem() = default;

    CascadeSystem(Mat a0, Mat a1, Exponent exponent = Exponent::one())
        : m(static_cast<int>(a0.rows())), A0(std::move(a0)), A1(std::move(a1)), p(exponent) {
        if (m < 1 || m > kMaxBlockSize)
            throw Error(ErrorKind::InvalidArgument, "block size m must be in [1, 16]");
        if (A0.cols() != m || A1.rows() != m || A1.cols() != m)
            throw Error(ErrorKind::InvalidArgument, "A0 and A1 must both be m x m");
        if (!A0.allFinite() || !A1.allFinite())
            throw Error(ErrorKind::InvalidArgument, "matrix entries must be finite");
    }

    [[nodiscard]] CascadeSystem with_exponent(Exponent q) const {
        CascadeSystem s = *this;
        s.p = q;
        return s;
    }

    [[nodiscard]] bool coupling_nonzero() const { return A1.norm() > 1e-14 * std::max(1.0, A0.norm()); }
};

struct CharacteristicFn {
    RatFun phi;
    double validation_residual = 0.0;
    std::optional<int> n_phi;
    std::optional<cplx> phi0;
    std::optional<cplx> dphi0;

    [[nodiscard]] cplx operator()(cplx lambda) const { return phi(lambda); }
    [[nodiscard]] cplx derivative(cplx lambda) const { return phi.derivative_at(lambda); }
};

namespace detail {

/// Samples f at m+1 scaled roots of unity and returns the interpolating
/// polynomial coefficients of degree <= n.
template <class F>
[[nodiscard]] std::vector<cplx> interpolate_on_circle(F&& f, int n, double radius) {
    const int pts = n + 1;
    std::vector<cplx> vals(static_cast<std::size_t>(pts));
    for (int k = 0; k < pts; ++k) vals[static_cast<std::size_t>(k)] = f(radius * std::polar(1.0, 2.0 * kPi * k / pts));
    std::vector<cplx> c(static_cast<std::size_t>(pts));
    for (int j = 0; j < pts; ++j) {
        cplx acc = 0.0;
        for (int k = 0; k < pts; ++k) acc += vals[static_cast<std::size_t>(k)] * std::polar(1.0, -2.0 * kPi * j * k / pts);
        c[static_cast<std::size_t>(j)] = acc / (static_cast<double>(pts) * std::pow(radius, j));
    }
    return c;
}

[[nodiscard]] inline double a2_tolerance(const CascadeSystem& sys, const Mat& r) {
    return 1e-9 * sys.A1.norm() * std::max(1.0, norm2(sys.A1) * norm2(r));
}

}  // namespace detail

/// det(lambda I - A0) as a monic polynomial.
[[nodiscard]] inline Poly characteristic_polynomial(const Mat& a0) {
    const int m = static_cast<int>(a0.rows());
    const double radius = 1.0 + norm2(a0);
    auto c = detail::interpolate_on_circle(
        [&](cplx z) { return (z * Mat::Identity(m, m) - a0).partialPivLu().determinant(); }, m, radius);
    c.back() = 1.0;
    return Poly(std::move(c), 0.0);
}

/// Frobenius residual ||A1 R A1 - phi A1|| of the defining identity at lambda.
[[nodiscard]] inline double a2_residual(const CascadeSystem& sys, const RatFun& phi, cplx lambda) {
    const Mat r = resolvent(sys.A0, lambda);
    return (sys.A1 * r * sys.A1 - phi(lambda) * sys.A1).norm();
}

/// Lowest nonvanishing order of 1 - |phi(is)| at s = 0.
[[nodiscard]] inline int resolvent_growth_parameter(const RatFun& phi) {
    const RealPoly r = modulus_diff_on_axis(phi);
    const double scale = r.max_abs_coeff();
    if (scale == 0.0) throw Error(ErrorKind::NotEvenOrder, "|phi| is identically 1 on the imaginary axis");
    for (int n = 0; n <= r.degree(); ++n) {
        const double c = r.coeff(n);
        if (std::abs(c) > 1e-10 * scale) {
            if (n == 0) throw Error(ErrorKind::NotEvenOrder, "|phi(0)| != 1, so 0 is not on the level set");
            if (n % 2 != 0 || c < 0.0)
                throw Error(ErrorKind::NotEvenOrder,
                            "lowest order " + std::to_string(n) + " of 1-|phi(is)| is odd or has negative coefficient");
            return n;
        }
    }
    throw Error(ErrorKind::NotEvenOrder, "no surviving coefficient");
}

[[nodiscard]] inline int resolvent_growth_parameter(const CharacteristicFn& cf) {
    return resolvent_growth_parameter(cf.phi);
}

[[nodiscard]] inline CharacteristicFn extract_char_fn(const CascadeSystem& sys) {
    if (!sys.coupling_nonzero())
        throw Error(ErrorKind::AssumptionViolated, "coupling assumption a1 violated: A1 = 0");
    const int m = sys.m;
    const double a1n2 = sys.A1.squaredNorm();
    const double radius = 1.0 + norm2(sys.A0);

    const Poly det = characteristic_polynomial(sys.A0);
    // N(l) = <A1 adj(l - A0) A1, A1>_F / ||A1||_F^2 has degree <= m-1
    auto numer = [&](cplx z) {
        const Mat shifted = z * Mat::Identity(m, m) - sys.A0;
        auto lu = shifted.partialPivLu();
        const Mat adj_a1 = lu.determinant() * lu.solve(sys.A1);
        return frobenius_dot(sys.A1 * adj_a1, sys.A1) / a1n2;
    };
    auto nc = detail::interpolate_on_circle(numer, m, radius);
    nc.pop_back();  // the degree-m coefficient vanishes identically
    const Poly num(std::move(nc));

    CharacteristicFn cf;
    cf.phi = reduce_coprime(num, det);

    const double vr = 2.0 * radius;
    for (int k = 0; k < 20; ++k) {
        const cplx z = vr * std::polar(1.0, 2.0 * kPi * (k + 0.37) / 20.0);
        const Mat r = resolvent(sys.A0, z);
        const double res = (sys.A1 * r * sys.A1 - cf.phi(z) * sys.A1).norm();
        cf.validation_residual = std::max(cf.validation_residual, res);
        if (res > detail::a2_tolerance(sys, r))
            throw Error(ErrorKind::NoCharacteristicFunction,
                        "assumption a2 violated: A1 R(lambda,A0) A1 is not proportional to A1 (residual " +
                            std::to_string(res) + ")");
    }

    if (std::abs(cf.phi.den()(0.0)) > 1e-12 * std::max(1.0, cf.phi.den().max_abs_coeff())) {
        cf.phi0 = cf.phi(0.0);
        cf.dphi0 = cf.phi.derivative_at(0.0);
        if (std::abs(std::abs(*cf.phi0) - 1.0) <= 1e-9) {
            try {
                cf.n_phi = resolvent_growth_parameter(cf.phi);
            } catch (const Error&) {
                cf.n_phi.reset();
            }
        }
    }
    return cf;
}

/// One basis element of ker(lambda - A) on l^inf: z_k = ratio^k x0.
struct KernelElement {
    Vec x0;
    cplx ratio;

    [[nodiscard]] Vec at(std::int64_t k) const { return std::pow(ratio, static_cast<double>(k)) * x0; }
};

[[nodiscard]] inline std::vector<KernelElement> kernel_basis(const CascadeSystem& sys, const CharacteristicFn& cf,
                                                             cplx lambda) {
    if (!sys.p.is_inf()) throw Error(ErrorKind::WrongSpace, "eigenvectors on the level set exist only for p = inf");
    for (cplx e : eigenvalues(sys.A0))
        if (std::abs(e - lambda) <= 1e-12 * std::max(1.0, std::abs(e)))
            throw Error(ErrorKind::NotInSpectrum, "lambda lies in the spectrum of A0");
    const cplx ph = cf(lambda);
    if (std::abs(std::abs(ph) - 1.0) > 1e-8)
        throw Error(ErrorKind::NotInSpectrum, "|phi(lambda)| = " + std::to_string(std::abs(ph)) + " != 1");
    const Mat basis = range_basis(resolvent(sys.A0, lambda) * sys.A1);
    std::vector<KernelElement> out;
    for (Eigen::Index j = 0; j < basis.cols(); ++j) out.push_back({basis.col(j), ph});
    return out;
}

/// Inverse of A1 A0^{-1} restricted to ran(A0^{-1} A1), landing in ran(A1).
[[nodiscard]] inline Vec limit_lift(const CascadeSystem& sys, const Vec& y0) {
    const double yn = y0.norm();
    if (yn == 0.0) return Vec::Zero(sys.m);
    const Mat u = range_basis(sys.A1);
    if ((y0 - u * (u.adjoint() * y0)).norm() > 1e-9 * yn)
        throw Error(ErrorKind::NotInRange, "y0 is not in the range of A1");
    const auto a0lu = sys.A0.partialPivLu();
    const Mat v = range_basis(a0lu.solve(sys.A1));
    const Mat op = sys.A1 * a0lu.solve(v);
    const Vec c = op.completeOrthogonalDecomposition().solve(y0);
    const Vec z0 = v * c;
    if ((sys.A1 * a0lu.solve(z0) - y0).norm() > 1e-10 * yn)
        throw Error(ErrorKind::NotInRange, "A1 A0^{-1} is not invertible on the required range");
    return z0;
}

}  // namespace cascade
