#include "helpers.hpp"
#include "oracle.hpp"

using namespace cascade;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

std::vector<CascadeSystem> presets() {
    return {robot_system(), platoon_system(1.0), platoon_system(0.6), th::random_rank1_system(2)};
}

/// Sup over k in [lo, hi) of ||a_k - b_k||.
double window_diff(const SeqState& a, const SeqState& b, std::int64_t lo, std::int64_t hi) {
    double d = 0.0;
    for (std::int64_t k = lo; k < hi; ++k) d = std::max(d, (a.at(k) - b.at(k)).norm());
    return d;
}

}  // namespace

TEST_CASE("robot kernels are Poisson weights", "[semigroup]") {
    const auto k = block_kernels(robot_system(), 1.0, 1e-12);
    CHECK(k.L() <= 17);
    CHECK(k.tail_bound <= 1e-12);
    for (int l = 0; l <= k.L(); ++l)
        CHECK(std::abs(k.blocks[static_cast<std::size_t>(l)](0, 0) - std::exp(-1.0) / factorial(l)) <= 1e-15);
    // the true tail is below the reported bound
    double tail = 0.0;
    for (int l = k.L() + 1; l < 40; ++l) tail += std::exp(-1.0) / factorial(l);
    CHECK(tail <= k.tail_bound);
}

TEST_CASE("kernels at t = 0 are the identity", "[semigroup]") {
    for (const auto& sys : presets()) {
        const auto k = block_kernels(sys, 0.0, 1e-12);
        REQUIRE(!k.blocks.empty());
        CHECK((k.blocks[0] - Mat::Identity(sys.m, sys.m)).norm() == 0.0);
        for (std::size_t l = 1; l < k.blocks.size(); ++l) CHECK(k.blocks[l].norm() == 0.0);
    }
}

TEST_CASE("kernel argument validation", "[semigroup]") {
    const auto sys = robot_system();
    try {
        (void)block_kernels(sys, -1.0, 1e-12);
        FAIL("expected TimeNegative");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TimeNegative);
    }
    try {
        (void)block_kernels(sys, 1.0, 0.0);
        FAIL("expected EpsilonNonpositive");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EpsilonNonpositive);
    }
}

TEST_CASE("platoon kernels match the dense truncated exponential", "[semigroup]") {
    const auto sys = platoon_system(1.0);
    const auto k = block_kernels(sys, 2.0, 1e-12);
    const auto dense = th::dense_blocks(sys.A0, sys.A1, 61, 2.0);
    REQUIRE(k.L() < 61);
    for (int l = 0; l < 61; ++l) {
        const Mat b = l <= k.L() ? k.blocks[static_cast<std::size_t>(l)] : Mat::Zero(3, 3);
        CHECK((b - dense[static_cast<std::size_t>(l)]).norm() <= 1e-10);
    }
    const Mat e0 = (2.0 * sys.A0).exp();
    CHECK((k.blocks[0] - e0).norm() <= 1e-12);
}

TEST_CASE("tail bound dominates the discarded blocks", "[semigroup][property]") {
    for (const auto& sys : presets()) {
        for (double t : {0.5, 3.0, 10.0}) {
            const auto k = block_kernels(sys, t, 1e-8);
            CHECK(k.tail_bound <= 1e-8);
            const int n = k.L() + 40;
            const auto dense = th::dense_blocks(sys.A0, sys.A1, n, t);
            double tail = 0.0;
            for (int l = k.L() + 1; l < n; ++l) tail += norm2(dense[static_cast<std::size_t>(l)]);
            CHECK(tail <= k.tail_bound * (1.0 + 1e-6) + 1e-15);
        }
    }
}

TEST_CASE("robot evolution of a delta", "[semigroup]") {
    const auto r = apply_semigroup(robot_system(), SeqState::delta(1, 0, Vec::Constant(1, 1.0)), 1.0);
    for (int k = 0; k < 15; ++k) CHECK(std::abs(r.state.at(k)(0) - std::exp(-1.0) / factorial(k)) <= 1e-15);
    CHECK(r.state.at(-1).norm() == 0.0);
}

TEST_CASE("kernel sequences at 0 are stationary", "[semigroup]") {
    for (const auto& base : {robot_system(), platoon_system(1.0)}) {
        const auto sys = base.with_exponent(Exponent::inf());
        const auto kb = kernel_basis(sys, extract_char_fn(sys), 0.0);
        REQUIRE(kb.size() == 1);
        const SeqState z = SeqState::constant(sys.m, kb[0].x0);
        for (double t : {0.5, 5.0, 50.0}) {
            const auto r = apply_semigroup(sys, z, t);
            CHECK(window_diff(r.state, z, -100, 100) <= 1e-9);
        }
        CHECK(apply_generator(sys, z).sup_norm() <= 1e-12);
    }
}

TEST_CASE("platoon evolution matches the dense oracle", "[semigroup]") {
    const auto sys = platoon_system(1.0);
    const SeqState x = th::random_state(3, 8, Exponent::one(), 0);
    const int n = 80;
    std::vector<Vec> blocks;
    for (int k = 0; k < n; ++k) blocks.push_back(x.at(k));
    const auto dense = th::dense_evolve(sys.A0, sys.A1, blocks, 3.0);
    const auto r = apply_semigroup(sys, x, 3.0);
    double d = 0.0;
    for (int k = 0; k < n; ++k) d = std::max(d, (r.state.at(k) - dense[static_cast<std::size_t>(k)]).norm());
    CHECK(d <= 1e-8);
}

TEST_CASE("N = 40 dense oracle equivalence on all presets", "[semigroup][property]") {
    for (const auto& sys : presets()) {
        const KernelBuilder kb(sys);
        for (double t : {0.3, 2.0, 6.0}) {
            const SeqState x = th::random_state(sys.m, 6, Exponent::one(), 0);
            std::vector<Vec> blocks;
            for (int k = 0; k < 40; ++k) blocks.push_back(x.at(k));
            const auto dense = th::dense_evolve(sys.A0, sys.A1, blocks, t);
            const auto r = apply_semigroup(kb, x, t);
            double d = 0.0;
            for (int k = 0; k < 40; ++k) d = std::max(d, (r.state.at(k) - dense[static_cast<std::size_t>(k)]).norm());
            CHECK(d <= 1e-8);
        }
    }
}

TEST_CASE("periodic tails evolve like the circulant system", "[semigroup][property]") {
    for (const auto& base : presets()) {
        const auto sys = base.with_exponent(Exponent::inf());
        for (int q : {1, 3, 5}) {
            std::vector<Vec> pat;
            for (int j = 0; j < q; ++j) pat.push_back(th::random_vec(sys.m));
            const SeqState x = SeqState::periodic(sys.m, pat);
            // the period-q block circulant A0 + A1 S
            const int m = sys.m;
            Mat c = Mat::Zero(q * m, q * m);
            for (int j = 0; j < q; ++j) {
                c.block(j * m, j * m, m, m) += sys.A0;
                c.block(j * m, ((j - 1 + q) % q) * m, m, m) += sys.A1;
            }
            Vec v(q * m);
            for (int j = 0; j < q; ++j) v.segment(j * m, m) = pat[static_cast<std::size_t>(j)];
            const double t = 1.7;
            const Vec w = (t * c).exp() * v;
            const auto r = apply_semigroup(sys, x, t);
            double d = 0.0;
            for (std::int64_t k = -2 * q - 7; k < 2 * q + 7; ++k)
                d = std::max(d, (r.state.at(k) - w.segment(floor_mod(k, q) * m, m)).norm());
            CHECK(d <= 1e-9);
        }
    }
}

TEST_CASE("a step profile evolves like the dense oracle", "[semigroup]") {
    // zero on the left, constant c on the right: exact on any window [0, N)
    const auto sys = platoon_system(1.0, Exponent::inf());
    const Vec c = th::random_vec(3);
    const SeqState x(3, 0, {}, TailRule::zero(), TailRule::constant(c), Exponent::inf());
    const int n = 60;
    const auto dense = th::dense_evolve(sys.A0, sys.A1, std::vector<Vec>(static_cast<std::size_t>(n), c), 2.5);
    const auto r = apply_semigroup(sys, x, 2.5);
    double d = 0.0;
    for (int k = 0; k < n; ++k) d = std::max(d, (r.state.at(k) - dense[static_cast<std::size_t>(k)]).norm());
    CHECK(d <= 1e-9);
    for (int k = -20; k < 0; ++k) CHECK(r.state.at(k).norm() <= 1e-15);
}

TEST_CASE("semigroup law", "[semigroup][property]") {
    for (const auto& sys : presets()) {
        const KernelBuilder kb(sys);
        for (int trial = 0; trial < 5; ++trial) {
            const SeqState x = th::random_state(sys.m, th::unif_int(1, 10), Exponent::one(), th::unif_int(-5, 5));
            const double s = th::unif(0.01, 5.0), t = th::unif(0.01, 5.0);
            const SeqState a = apply_semigroup(kb, apply_semigroup(kb, x, s).state, t).state;
            const SeqState b = apply_semigroup(kb, x, s + t).state;
            CHECK((a - b).norm() <= 1e-9 * x.norm());
        }
    }
}

TEST_CASE("finite differences converge to the generator at first order", "[semigroup][property]") {
    for (const auto& sys : presets()) {
        const KernelBuilder kb(sys);
        const SeqState x = th::random_state(sys.m, 6, Exponent::one(), -2);
        const SeqState ax = apply_generator(sys, x);
        double err[2];
        int i = 0;
        for (double h : {1e-3, 1e-4}) {
            const SeqState fd = (apply_semigroup(kb, x, h).state - x).scaled(1.0 / h);
            err[i++] = (fd - ax).norm();
        }
        // error ~ C h: a tenfold smaller step gives roughly a tenfold smaller error
        CHECK(err[1] < err[0]);
        CHECK(err[0] / err[1] > 5.0);
        CHECK(err[0] <= 1e-3 * 10.0 * std::max(1.0, x.norm()) * std::pow(1.0 + norm2(sys.A0) + norm2(sys.A1), 2));
    }
}

TEST_CASE("generator examples", "[semigroup]") {
    const auto robot = robot_system(Exponent::inf());
    CHECK(apply_generator(robot, SeqState::constant(1, Vec::Constant(1, 2.5))).sup_norm() == 0.0);
    const SeqState ad = apply_generator(robot_system(), SeqState::delta(1, 0, Vec::Constant(1, 1.0)));
    CHECK(ad.at(0)(0) == cplx(-1.0));
    CHECK(ad.at(1)(0) == cplx(1.0));
    CHECK(ad.at(2).norm() == 0.0);
    CHECK(ad.at(-1).norm() == 0.0);
}

TEST_CASE("robot resolvent of a delta at lambda = 1", "[semigroup]") {
    const auto sys = robot_system();
    const auto cf = extract_char_fn(sys);
    const SeqState x = SeqState::delta(1, 0, Vec::Constant(1, 1.0));
    const SeqState y = apply_resolvent(sys, cf, x, 1.0);
    CHECK(std::abs(y.at(0)(0) - 0.5) <= 1e-15);
    for (int k = 1; k < 30; ++k) CHECK(std::abs(y.at(k)(0) - 0.25 * std::pow(0.5, k - 1)) <= 1e-14);
    CHECK(y.at(-1).norm() == 0.0);
    CHECK(resolvent_identity_residual(sys, x, y, 1.0) <= 1e-12);
}

TEST_CASE("resolvent identity for random data", "[semigroup][property]") {
    for (const auto& sys : presets()) {
        const auto cf = extract_char_fn(sys);
        for (int trial = 0; trial < 20; ++trial) {
            cplx lam;
            do lam = th::crand(3.0);
            while (std::abs(std::abs(cf(lam)) - 1.0) < 0.05 || std::abs(cf(lam)) > 20.0);
            const SeqState x = th::random_state(sys.m, th::unif_int(1, 8), Exponent::one(), th::unif_int(-4, 4));
            const SeqState y = apply_resolvent(sys, cf, x, lam);
            CHECK(resolvent_identity_residual(sys, x, y, lam) <= 1e-10 * std::max(1.0, x.sup_norm()));
        }
    }
}

TEST_CASE("resolvent inside the level set uses the anticausal series", "[semigroup]") {
    const auto sys = platoon_system(1.0);
    const auto cf = extract_char_fn(sys);
    const cplx lam = -0.5;
    REQUIRE(std::abs(cf(lam)) > 1.0);
    const SeqState x = th::random_state(3, 5);
    const SeqState y = apply_resolvent(sys, cf, x, lam);
    CHECK(resolvent_identity_residual(sys, x, y, lam) <= 1e-10);
    try {
        (void)apply_resolvent(sys, cf, x, 0.0);
        FAIL("expected OnLevelSet");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OnLevelSet);
    }
}

TEST_CASE("Laplace transform of the semigroup is the resolvent", "[semigroup][property]") {
    for (const auto& sys : {robot_system(), platoon_system(1.0)}) {
        const KernelBuilder kb(sys);
        const auto cf = extract_char_fn(sys);
        const SeqState x = th::random_state(sys.m, 3, Exponent::one(), 0);
        const double h = 1e-2;
        const int n = 4000;  // T = 40
        SeqState acc = x.scaled(0.0);
        for (int i = 0; i <= n; ++i) {
            const double t = i * h;
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            acc = acc + apply_semigroup(kb, x, t).state.scaled(w * std::exp(-t) * h / 3.0);
        }
        const SeqState r = apply_resolvent(sys, cf, x, 1.0);
        CHECK(window_diff(acc, r, -5, 200) <= 1e-6);
    }
}

TEST_CASE("robot semigroup is contractive", "[semigroup][property]") {
    const KernelBuilder kb(robot_system());
    for (Exponent p : {Exponent::one(), Exponent::two(), Exponent::inf()}) {
        for (int trial = 0; trial < 50; ++trial) {
            const SeqState x = th::random_state(1, th::unif_int(1, 20), p, th::unif_int(-10, 10));
            const double t = th::unif(1e-3, 10.0);
            CHECK(apply_semigroup(kb, x, t).state.norm(p) <= x.norm(p) + 1e-12);
        }
    }
}

TEST_CASE("Abel means of a Cesaro-convergent robot state stay bounded", "[semigroup][property]") {
    const auto sys = robot_system();
    const auto cf = extract_char_fn(sys);
    const SeqState x(1, 0, {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)});
    double last = 0.0;
    for (double lam : logspace(1.0, 1e-3, 20)) {
        last = apply_resolvent(sys, cf, x, lam).norm();
        CHECK(last <= 2.0 + 1e-9);
    }
    CHECK(last == Catch::Approx(2.0 / 1.001).epsilon(1e-9));
}
