#pragma once

// Standing hypotheses a1..a5 on a cascade system, checked numerically:
//   a1  A1 != 0
//   a2  A1 R(lambda,A0) A1 = phi(lambda) A1 for a rational phi
//   a3  sigma(A0) in the open left half-plane
//   a4  |phi(0)| = 1, phi'(0) != 0, the level set meets iR only at 0 and
//       stays in the closed left half-plane
//   a5  the semigroup is uniformly bounded

#include "cascade/bounds.hpp"

#include <cstdio>

namespace cascade {

struct AssumptionReport {
    bool a1_holds = false;
    bool a2_holds = false;
    bool a3_holds = false;
    bool a4_holds = false;
    A5Status a5_status = A5Status::unknown;
    std::vector<std::string> diagnostics;
    std::optional<CharacteristicFn> char_fn;

    [[nodiscard]] bool a1_to_a4() const { return a1_holds && a2_holds && a3_holds && a4_holds; }
};

namespace detail {

[[nodiscard]] inline std::string fmt_cplx(cplx z) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
    return buf;
}

/// Extent of the right-half-plane probe box.
[[nodiscard]] inline double rhp_extent(const CascadeSystem& sys) {
    const double a0 = norm2(sys.A0);
    return std::max(4.0 * a0, a0 + norm2(sys.A1) + 1.0);
}

}  // namespace detail

/// Checks that the level set |phi| = 1 touches the imaginary axis only at 0
/// and does not enter the open right half-plane. Appends findings to diag.
[[nodiscard]] inline bool level_set_in_left_half_plane(const CascadeSystem& sys, const CharacteristicFn& cf,
                                                       std::vector<std::string>& diag, int grid = 400) {
    bool ok = true;
    const double ext = detail::rhp_extent(sys);
    const GapOnImagAxis gap(cf.phi);
    for (double s : logspace(1e-3, ext, 2000)) {
        for (double sg : {1.0, -1.0}) {
            if (!(gap(sg * s) > 0.0)) {
                diag.push_back("|phi(is)| >= 1 at s = " + std::to_string(sg * s));
                return false;
            }
        }
    }
    std::vector<double> worst(static_cast<std::size_t>(grid), 0.0);
    parallel_for(static_cast<std::size_t>(grid), [&](std::size_t i) {
        const double x = ext * static_cast<double>(i + 1) / grid;
        double w = 0.0;
        for (int j = 0; j < grid; ++j) {
            const double y = -ext + 2.0 * ext * j / (grid - 1);
            w = std::max(w, std::abs(cf.phi(cplx(x, y))));
        }
        worst[i] = w;
    }, 8);
    const double w = *std::max_element(worst.begin(), worst.end());
    if (!(w < 1.0)) {
        diag.push_back("|phi| reaches " + std::to_string(w) + " in the right half-plane");
        ok = false;
    }
    return ok;
}

[[nodiscard]] inline AssumptionReport check_assumptions(const CascadeSystem& sys) {
    AssumptionReport rep;
    rep.a1_holds = sys.coupling_nonzero();
    if (!rep.a1_holds) {
        rep.diagnostics.push_back("a1 fails: A1 = 0, the subsystems are uncoupled");
        return rep;
    }

    try {
        rep.char_fn = extract_char_fn(sys);
        rep.a2_holds = true;
    } catch (const Error& e) {
        rep.diagnostics.push_back(std::string("a2 fails: ") + e.what());
    }

    const auto eig = eigenvalues(sys.A0);
    rep.a3_holds = std::all_of(eig.begin(), eig.end(), [](cplx e) { return e.real() < -1e-10; });
    if (!rep.a3_holds) rep.diagnostics.push_back("a3 fails: A0 has an eigenvalue with real part >= -1e-10");

    const int m = sys.m;
    for (cplx mu : eig) {
        const Mat shifted = mu * Mat::Identity(m, m) - sys.A0;
        Mat stacked(2 * m, m);
        stacked << shifted, sys.A1;
        if (nullity(stacked, 1e-8) > 0)
            rep.diagnostics.push_back("ker(mu - A0) and ker(A1) intersect nontrivially at mu = " + detail::fmt_cplx(mu) +
                                      ": mu is an eigenvalue of A");
        Mat side(m, 2 * m);
        side << shifted, sys.A1;
        if (numerical_rank(side, 1e-8) < m)
            rep.diagnostics.push_back("rank[mu - A0, A1] < m at mu = " + detail::fmt_cplx(mu) +
                                      ": mu lies in the spectrum of A");
    }

    if (rep.a2_holds) {
        const auto& cf = *rep.char_fn;
        bool a4 = true;
        if (!cf.phi0) {
            rep.diagnostics.push_back("a4 fails: phi has a pole at 0");
            a4 = false;
        } else {
            if (std::abs(std::abs(*cf.phi0) - 1.0) > 1e-9) {
                rep.diagnostics.push_back("a4 fails: |phi(0)| = " + std::to_string(std::abs(*cf.phi0)) + " != 1");
                a4 = false;
            }
            if (std::abs(*cf.dphi0) <= 1e-9) {
                rep.diagnostics.push_back("a4 fails: phi'(0) = 0");
                a4 = false;
            }
        }
        if (a4 && !cf.n_phi) {
            rep.diagnostics.push_back("a4 fails: 1 - |phi(is)| has no even positive leading order at 0");
            a4 = false;
        }
        if (a4) a4 = level_set_in_left_half_plane(sys, cf, rep.diagnostics);
        rep.a4_holds = a4;
    }

    if (rep.a1_to_a4()) rep.a5_status = check_uniform_boundedness(sys, *rep.char_fn).verdict;
    return rep;
}

}  // namespace cascade
