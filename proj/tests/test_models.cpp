#include "helpers.hpp"

using namespace cascade;

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double m_slope(const std::function<double(double)>& m) {
    std::vector<double> lx, ly;
    for (double r : logspace(1e-4, 1e-2, 30)) {
        lx.push_back(std::log(r));
        ly.push_back(std::log(m(r)));
    }
    return slope(lx, ly);
}

}  // namespace

TEST_CASE("platoon presets", "[models]") {
    for (double zeta : {0.3, 1.0, 2.0, 5.0}) {
        const auto cf = extract_char_fn(platoon_system(zeta));
        REQUIRE(cf.phi0);
        CHECK(std::abs(*cf.phi0 - 1.0) <= 1e-10);
        REQUIRE(cf.n_phi);
        CHECK(*cf.n_phi == 2);
    }
    const auto cf2 = extract_char_fn(platoon_system(2.0));
    const auto ls = trace_level_set(cf2, Box{-5.0, 1.0, -3.0, 3.0}, 0.02);
    REQUIRE(ls.polylines.size() == 1);
    for (cplx z : ls.polylines[0]) CHECK(std::abs(std::abs(z + 2.0) - 2.0) <= 1e-6);
    CHECK_THROWS_AS(platoon_system(0.0), Error);
}

TEST_CASE("feedback gains map to alpha coefficients", "[models]") {
    const auto p = PlatoonParams::from_feedback(0.5, -1.0, -3.0, -0.5);
    CHECK(p.alpha[0] == cplx(2.0));
    CHECK(p.alpha[1] == cplx(6.0));
    CHECK(p.alpha[2] == cplx(3.0));
    CHECK_THROWS_AS(PlatoonParams::from_feedback(0.0, 1.0, 1.0, 1.0), Error);
}

TEST_CASE("platoon phi is alpha0 over the characteristic polynomial", "[models][property]") {
    for (int trial = 0; trial < 20; ++trial) {
        PlatoonParams prm{{th::crand(2.0) + 2.5, th::crand(2.0), th::crand(2.0)}};
        const auto cf = extract_char_fn(platoon_system(prm));
        REQUIRE(cf.phi.den().degree() == 3);
        REQUIRE(cf.phi.num().degree() == 0);
        const cplx lead = cf.phi.den().leading();
        CHECK(std::abs(cf.phi.num().coeff(0) / lead - prm.alpha[0]) <= 1e-12 * std::abs(prm.alpha[0]) * 10);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(cf.phi.den().coeff(i) / lead - prm.alpha[static_cast<std::size_t>(i)]) <= 1e-12 * 10 * (1.0 + std::abs(prm.alpha[static_cast<std::size_t>(i)])));
    }
}

TEST_CASE("robot preset", "[models]") {
    const auto sys = robot_system();
    const auto eig = eigenvalues(sys.A0);
    REQUIRE(eig.size() == 1);
    CHECK(eig[0] == cplx(-1.0));
    const auto cf = extract_char_fn(sys);
    CHECK(std::abs(cf(2.0) - 1.0 / 3.0) < 1e-15);
    CHECK(check_contractivity(sys, cf).passes);
}

TEST_CASE("robot kernel closed form", "[models]") {
    SECTION("t = 0") {
        const auto rk = robot_kernel_closed_form(0.0);
        REQUIRE(!rk.poisson.empty());
        CHECK(rk.poisson[0] == 1.0);
        for (std::size_t n = 1; n < rk.poisson.size(); ++n) CHECK(rk.poisson[n] == 0.0);
        CHECK(rk.y_scaled[0] == 1.0);
        CHECK(rk.scaled_norm1 == 1.0);
        CHECK(rk.bound == 2.0);
    }
    SECTION("weights agree with lgamma") {
        for (double t : {0.3, 1.0, 7.5, 40.0, 333.3}) {
            const auto rk = robot_kernel_closed_form(t);
            double mass = 0.0;
            for (std::size_t n = 0; n < rk.poisson.size(); ++n) {
                const double want = std::exp(-t + n * std::log(t) - std::lgamma(n + 1.0));
                CHECK(std::abs(rk.poisson[n] - want) <= 1e-12 * std::max(want, 1e-300) + 1e-300);
                mass += rk.poisson[n];
            }
            CHECK(mass == Catch::Approx(1.0).epsilon(1e-13));
            CHECK(rk.bound == Catch::Approx(robot_AT_bound(t)).epsilon(1e-12));
        }
    }
    SECTION("Stirling form of the log weight") {
        for (std::int64_t n : {10, 50, 1000, 100000})
            for (double t : {5.0, 1000.0, 2e5}) {
                const double want = -t + static_cast<double>(n) * std::log(t) - std::lgamma(static_cast<double>(n) + 1.0);
                CHECK(std::abs(log_poisson_weight(t, n) - want) <= 1e-9 * std::max(1.0, std::abs(want)));
            }
    }
    CHECK_THROWS_AS(robot_kernel_closed_form(-1.0), Error);
}

TEST_CASE("robot bound with C = 4.705 for t >= 2", "[models]") {
    for (int i = 0; i <= 980; ++i) {
        const double t = 2.0 + 0.1 * i;
        const auto rk = robot_kernel_closed_form(t);
        CHECK(rk.bound <= 4.705 / std::sqrt(t));
    }
}

TEST_CASE("robot bound times sqrt(t) near the asymptotic constant", "[models][unattainable]") {
    const double v = robot_kernel_closed_form(1e6).bound * std::sqrt(1e6);
    INFO("e^-t (1 + ||y||_1) sqrt(t) at t = 1e6 is " << v);
    CHECK(v >= 2.0);
    CHECK(v <= 2.3);
}

TEST_CASE("robot bound constants", "[models]") {
    CHECK(std::round(robot_AT_bound_constant(2.0) * 1000.0) / 1000.0 == Catch::Approx(4.705));
    CHECK(std::round(robot_AT_bound_constant(100.0) * 1000.0) / 1000.0 == Catch::Approx(2.191));
    CHECK(std::round(robot_AT_bound_constant(1e6) * 1000.0) / 1000.0 == Catch::Approx(2.169));
    CHECK(robot_AT_bound_constant(1e6) == Catch::Approx(std::exp(1.0) * std::sqrt(2.0 / kPi)).epsilon(1e-5));
    try {
        (void)robot_AT_bound_constant(1.0);
        FAIL("expected DomainError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DomainError);
    }
}

TEST_CASE("robot bound dominates the empirical ||A T(t) x|| / ||x||", "[models][property]") {
    const auto sys = robot_system();
    const KernelBuilder kb(sys);
    for (double t : {2.0, 5.0, 10.0, 50.0}) {
        const double bound = robot_AT_bound(t);
        for (int trial = 0; trial < 50; ++trial) {
            const SeqState x = th::random_state(1, th::unif_int(1, 25), Exponent::one(), th::unif_int(-10, 10));
            const double ratio = apply_generator(sys, apply_semigroup(kb, x, t).state).norm() / x.norm();
            CHECK(ratio <= bound + 1e-9);
        }
    }
}

TEST_CASE("Stirling chain for ||y(t)||_1", "[models][property]") {
    for (double t = 2.0; t <= 500.0; t += 0.37) {
        const auto rk = robot_kernel_closed_form(t);
        const auto n = static_cast<std::int64_t>(std::floor(t));
        CHECK(rk.scaled_norm1 <= 2.0 * std::exp(log_poisson_weight(t, n)) * (1.0 + 1e-12));
    }
}

TEST_CASE("variable-coefficient resolvent", "[models]") {
    SECTION("uniform chain is the robot") {
        const auto chain = RobotChain::uniform();
        const auto sys = robot_system();
        const auto cf = extract_char_fn(sys);
        for (cplx lam : {cplx(1.0), cplx(0.5, 2.0), cplx(0.2, -0.4)}) {
            const SeqState x = th::random_state(1, 10, Exponent::one(), -3);
            const auto v = varcoef_resolvent_apply(chain, x, lam);
            const SeqState y = apply_resolvent(sys, cf, x, lam);
            double d = 0.0;
            for (std::int64_t k = -10; k < v.state.end() + 5; ++k) d = std::max(d, (v.state.at(k) - y.at(k)).norm());
            CHECK(d <= 1e-10);
        }
    }
    SECTION("alternating chain satisfies the resolvent identity") {
        const auto chain = RobotChain::alternating(-1.0, -2.0);
        for (int trial = 0; trial < 20; ++trial) {
            const SeqState x = th::random_state(1, th::unif_int(1, 15), Exponent::one(), th::unif_int(-5, 5));
            const auto v = varcoef_resolvent_apply(chain, x, 1.0);
            CHECK(varcoef_identity_residual(chain, x, v.state, 1.0) <= 1e-10);
        }
    }
    SECTION("norm bound holds") {
        const auto chain = RobotChain::alternating(cplx(-1.0), cplx(-1.5, 0.5));
        for (int trial = 0; trial < 50; ++trial) {
            cplx lam;
            do lam = th::crand(3.0);
            while (chain.dist(lam) < 1.05);
            const Exponent p = trial % 2 ? Exponent::one() : Exponent::two();
            const SeqState x = th::random_state(1, th::unif_int(1, 15), p, th::unif_int(-5, 5));
            const auto v = varcoef_resolvent_apply(chain, x, lam);
            CHECK(v.state.norm(p) / x.norm(p) <= v.norm_bound * (1.0 + 1e-12));
        }
    }
    SECTION("errors") {
        try {
            (void)varcoef_resolvent_apply(RobotChain::uniform(), th::random_state(1, 3), cplx(-1.0, 0.5));
            FAIL("expected TooCloseToSpectrum");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::TooCloseToSpectrum);
        }
        CHECK_THROWS_AS(RobotChain::alternating(-1.0, -0.5), Error);
    }
}

TEST_CASE("m(r) for finite coefficient sets and power regions", "[models]") {
    SECTION("Omega = {-1}") {
        const auto chain = RobotChain::uniform();
        for (double r : {1e-3, 0.1, 0.5, 1.0}) {
            const auto m = m_of_r(chain, r);
            CHECK(m.sup_value == Catch::Approx(1.0 / (std::sqrt(1.0 + r * r) - 1.0)).epsilon(1e-9));
            CHECK(m.value_at_r == Catch::Approx(m.sup_value).epsilon(1e-12));
        }
        CHECK(m_of_r(chain, 1e-2).sup_value * 1e-4 == Catch::Approx(2.0).epsilon(1e-4));
        CHECK_THROWS_AS(m_of_r(chain, 0.0), Error);
    }
    SECTION("alpha = 3 gives r^-3") {
        const auto reg = PsiRegion::power(3.0);
        const double s = m_slope([&](double r) { return m_of_r(reg, r).value_at_r; });
        CHECK(s >= -3.1);
        CHECK(s <= -2.9);
    }
    SECTION("alpha = 1.5 gives r^-2") {
        const auto reg = PsiRegion::power(1.5);
        const double s = m_slope([&](double r) { return m_of_r(reg, r).value_at_r; });
        CHECK(s >= -2.1);
        CHECK(s <= -1.9);
    }
    SECTION("alpha = 1 (psi'(0) > 0) also gives r^-2") {
        const auto reg = PsiRegion::power(1.0);
        const double s = m_slope([&](double r) { return m_of_r(reg, r).value_at_r; });
        CHECK(s == Catch::Approx(-2.0).margin(0.02));
    }
    SECTION("region distance against brute force") {
        for (double alpha : {1.0, 1.5, 3.0}) {
            const auto reg = PsiRegion::power(alpha);
            for (double r : {0.05, 0.3, 0.9}) {
                double best = kInf;
                for (int i = 0; i <= 200000; ++i) {
                    const double u = 2.0 * i / 200000.0;
                    best = std::min(best, std::hypot(reg.psi(u), r - u));
                }
                CHECK(region_gap(reg, r) == Catch::Approx(best - 1.0).epsilon(1e-5));
            }
        }
    }
    CHECK_THROWS_AS(PsiRegion::power(0.5), Error);
}

TEST_CASE("m_log inversion", "[models]") {
    SECTION("m = r^-2 gives ((log t)/t)^{1/2}") {
        const std::function<double(double)> m = [](double r) { return 1.0 / (r * r); };
        for (double t : logspace(1e2, 1e8, 25)) {
            const auto inv = mlog_inverse(m, 0.5, t);
            REQUIRE(inv.r);
            const double v = *inv.r * std::sqrt(t / std::log(t));
            CHECK(v >= 0.5);
            CHECK(v <= 3.0);
        }
    }
    SECTION("m = r^-1 round trip") {
        const std::function<double(double)> m = [](double r) { return 1.0 / r; };
        for (int trial = 0; trial < 100; ++trial) {
            const double v = std::exp(th::unif(std::log(2.0), std::log(1e12)));
            const auto inv = mlog_inverse(m, 0.5, 2.0 * v);
            REQUIRE(inv.r);
            CHECK(m_log(m, *inv.r) == Catch::Approx(v).epsilon(1e-9));
        }
    }
    SECTION("bounded m and out-of-range times") {
        const std::function<double(double)> m = [](double) { return 0.5; };
        const auto inv = mlog_inverse(m, 0.5, 1000.0);
        CHECK(inv.bounded_regime);
        CHECK_FALSE(inv.r);
        const std::function<double(double)> big = [](double r) { return 1.0 / (r * r); };
        try {
            (void)mlog_inverse(big, 0.5, 0.1);
            FAIL("expected OutOfRange");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::OutOfRange);
        }
    }
}

TEST_CASE("predicted exponent for Omega = {-1} matches the robot decay", "[models]") {
    const auto chain = RobotChain::uniform();
    const std::function<double(double)> m = [&](double r) { return m_of_r(chain, r).sup_value; };
    const double predicted = mlog_predicted_exponent(m, 0.5, 1e8, 1e12);
    const KernelBuilder kb(robot_system());
    const auto tr = simulate(kb, SeqState::delta(1, 0, Vec::Constant(1, 1.0)), logspace(10.0, 1000.0, 60));
    const auto fit = fit_decay_rate(tr, DecayQuantity::derivative_norm, 10.0, 1000.0);
    CHECK(std::abs(predicted - fit.fitted_exponent) <= 0.05);
}
