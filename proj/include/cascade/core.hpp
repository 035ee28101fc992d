#pragma once

// Shared vocabulary for the cascade library: scalar/matrix aliases, the
// error type, the sequence-space exponent, and a handful of dense linear
// algebra helpers on small complex blocks.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cascade {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// =============================================================================
// Errors
// =============================================================================

enum class ErrorKind {
    InvalidArgument,
    DegreeTooLarge,
    DegenerateDenominator,
    NonRealResidue,
    AssumptionViolated,
    NoCharacteristicFunction,
    NotEvenOrder,
    NotInSpectrum,
    WrongSpace,
    NotInRange,
    EmptyBox,
    OnLevelSet,
    TimeNegative,
    EpsilonNonpositive,
    AccuracyExceeded,
    WindowTooNoisy,
    DomainError,
    TooCloseToSpectrum,
    InfiniteM,
    OutOfRange,
};

[[nodiscard]] inline const char* to_string(ErrorKind k) noexcept {
    switch (k) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DegreeTooLarge: return "DegreeTooLarge";
        case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorKind::NonRealResidue: return "NonRealResidue";
        case ErrorKind::AssumptionViolated: return "AssumptionViolated";
        case ErrorKind::NoCharacteristicFunction: return "NoCharacteristicFunction";
        case ErrorKind::NotEvenOrder: return "NotEvenOrder";
        case ErrorKind::NotInSpectrum: return "NotInSpectrum";
        case ErrorKind::WrongSpace: return "WrongSpace";
        case ErrorKind::NotInRange: return "NotInRange";
        case ErrorKind::EmptyBox: return "EmptyBox";
        case ErrorKind::OnLevelSet: return "OnLevelSet";
        case ErrorKind::TimeNegative: return "TimeNegative";
        case ErrorKind::EpsilonNonpositive: return "EpsilonNonpositive";
        case ErrorKind::AccuracyExceeded: return "AccuracyExceeded";
        case ErrorKind::WindowTooNoisy: return "WindowTooNoisy";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::TooCloseToSpectrum: return "TooCloseToSpectrum";
        case ErrorKind::InfiniteM: return "InfiniteM";
        case ErrorKind::OutOfRange: return "OutOfRange";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// =============================================================================
// Exponent of the sequence space l^p(C^m)
// =============================================================================

class Exponent {
public:
    constexpr Exponent() = default;

    explicit Exponent(double p) : p_(p) {
        if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "exponent p must be >= 1");
    }

    [[nodiscard]] static Exponent one() { return Exponent(1.0); }
    [[nodiscard]] static Exponent two() { return Exponent(2.0); }
    [[nodiscard]] static Exponent inf() { return Exponent(kInf); }

    [[nodiscard]] double value() const noexcept { return p_; }
    [[nodiscard]] bool is_inf() const noexcept { return std::isinf(p_); }
    [[nodiscard]] bool is_one() const noexcept { return p_ == 1.0; }
    [[nodiscard]] bool is_reflexive() const noexcept { return p_ > 1.0 && !is_inf(); }

    /// Exponent of the logarithmic factor |1 - 2/p| in the decay rates.
    [[nodiscard]] double log_power() const noexcept {
        return is_inf() ? 1.0 : std::abs(1.0 - 2.0 / p_);
    }

    [[nodiscard]] std::string str() const {
        if (is_inf()) return "inf";
        std::string s = std::to_string(p_);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    friend bool operator==(const Exponent& a, const Exponent& b) noexcept { return a.p_ == b.p_; }

private:
    double p_ = 1.0;
};

// =============================================================================
// Small dense helpers
// =============================================================================

/// Spectral (Euclidean-induced) norm.
[[nodiscard]] inline double norm2(const Mat& a) {
    if (a.size() == 0) return 0.0;
    if (a.rows() == 1 || a.cols() == 1) return a.norm();
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

/// Logarithmic 2-norm: largest eigenvalue of the Hermitian part.
[[nodiscard]] inline double log_norm2(const Mat& a) {
    Mat h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

[[nodiscard]] inline std::vector<cplx> eigenvalues(const Mat& a) {
    if (a.rows() == 0) return {};
    Eigen::ComplexEigenSolver<Mat> es(a, false);
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
    return out;
}

/// Numerical rank with relative singular-value threshold.
[[nodiscard]] inline int numerical_rank(const Mat& a, double rel_tol = 1e-10) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

/// Orthonormal basis (columns) of ran(a).
[[nodiscard]] inline Mat range_basis(const Mat& a, double rel_tol = 1e-10) {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    int r = 0;
    if (s.size() > 0 && s(0) > 0.0)
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > rel_tol * s(0)) ++r;
    return svd.matrixU().leftCols(r);
}

/// Dimension of ker(a).
[[nodiscard]] inline int nullity(const Mat& a, double rel_tol = 1e-10) {
    return static_cast<int>(a.cols()) - numerical_rank(a, rel_tol);
}

/// R(lambda, A0) = (lambda - A0)^{-1}.
[[nodiscard]] inline Mat resolvent(const Mat& a0, cplx lambda) {
    const auto m = a0.rows();
    Mat shifted = lambda * Mat::Identity(m, m) - a0;
    return shifted.partialPivLu().inverse();
}

/// Frobenius inner product <a, b> = trace(b^H a).
[[nodiscard]] inline cplx frobenius_dot(const Mat& a, const Mat& b) {
    return (b.adjoint() * a).trace();
}

[[nodiscard]] inline std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    v.back() = hi;
    return v;
}

[[nodiscard]] inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

}  // namespace cascade
