#include "doctest.h"

#include <cmath>
#include <random>

#include "sbc/spaces.hpp"
#include "sbc/system.hpp"

using namespace sbc;

namespace {
const double kPi = pi_v<double>();
const double kXi = std::sqrt(2.0) / 3.0;
const double kEta = std::sqrt(2.0) / 4.0;

SystemConfig bench_config(int N = 7) { return SystemConfig(3.0, 2.0, 1.0, 0.5, kXi, kEta, N); }
}  // namespace

TEST_CASE("system config validates and stores point weights") {
    const SystemConfig cfg = bench_config();
    REQUIRE(cfg.m.size() == 7);
    for (int k = 1; k <= 7; ++k) {
        CHECK(cfg.m(k - 1) == std::sin(k * kXi));
        CHECK(cfg.n(k - 1) == std::sin(k * kEta));
    }
    CHECK_THROWS_AS(SystemConfig(0, 0, 0, 0, 0.0, 1.0, 3), ConfigError);
    CHECK_THROWS_AS(SystemConfig(0, 0, 0, 0, 1.0, kPi, 3), ConfigError);
    CHECK_THROWS_AS(SystemConfig(0, 0, 0, 0, 1.0, 1.0, 0), ConfigError);
}

TEST_CASE("weighted norm: single-mode and zero cases") {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
    e1(0) = 1.0;
    CHECK(weighted_norm(e1, {0.0, kXi, false}) == doctest::Approx(std::sin(kXi)).epsilon(1e-15));

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
    CHECK(weighted_norm(zero, {2.0, kEta, false}) == 0.0);
    CHECK(weighted_norm(zero, {-1.0, kXi, true}) == 0.0);
}

TEST_CASE("weighted norm agrees with an independent term-by-term sum") {
    Eigen::VectorXd c(2);
    c << 1.0, 1.0;
    const WeightedSpaceSpec spec{-1.0, kXi, false};
    const double expected =
        std::sqrt(std::sin(kXi) * std::sin(kXi) + std::pow(2.0, -2.0) * std::sin(2 * kXi) * std::sin(2 * kXi));
    CHECK(weighted_norm(c, spec) == doctest::Approx(expected).epsilon(1e-14));

    // dual weights invert the direct ones mode by mode
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Eigen::VectorXd d(6);
    for (int i = 0; i < 6; ++i) d(i) = u(rng);
    double manual = 0;
    for (int k = 1; k <= 6; ++k) {
        const double s = std::sin(k * kEta);
        manual += std::pow(double(k), -3.0) / (s * s) * d(k - 1) * d(k - 1);
    }
    CHECK(weighted_norm_squared(d, {1.5, kEta, true}) == doctest::Approx(manual).epsilon(1e-13));
}

TEST_CASE("weighted norm homogeneity") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Eigen::VectorXd c(8);
    for (int i = 0; i < 8; ++i) c(i) = u(rng);
    const WeightedSpaceSpec spec{0.5, kXi, false};
    for (double lam : {-2.5, 0.0, 0.3, 7.0}) {
        CHECK(weighted_norm((lam * c).eval(), spec) ==
              doctest::Approx(std::abs(lam) * weighted_norm(c, spec)).epsilon(1e-13));
    }
}

TEST_CASE("duality pairing satisfies the Cauchy-Schwarz lower bound") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const WeightedSpaceSpec direct{1.0, kXi, false};
    const WeightedSpaceSpec dual{1.0, kXi, true};
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd c(5);
        for (int i = 0; i < 5; ++i) c(i) = u(rng);
        const double lhs = weighted_norm(c, direct) * weighted_norm(c, dual);
        CHECK(lhs >= c.squaredNorm() - 1e-12);
    }
    // equality on a single mode
    Eigen::VectorXd e3 = Eigen::VectorXd::Zero(5);
    e3(2) = 1.7;
    CHECK(weighted_norm(e3, direct) * weighted_norm(e3, dual) ==
          doctest::Approx(e3.squaredNorm()).epsilon(1e-13));
}

TEST_CASE("dual norm rejects degenerate weights") {
    Eigen::VectorXd c(2);
    c << 1.0, 1.0;
    CHECK_THROWS_AS(weighted_norm(c, WeightedSpaceSpec{0.0, kPi / 2.0, true}), DegenerateModeError);
}

TEST_CASE("trace evaluates finite sine sums") {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(1);
    e1(0) = 1.0;
    CHECK(trace(e1, kPi / 2.0) == doctest::Approx(1.0).epsilon(1e-15));

    Eigen::VectorXd c(4);
    c << 0.3, -1.2, 0.8, 2.0;
    CHECK(trace(c, 0.0) == 0.0);

    Eigen::VectorXd c2(2);
    c2 << 1.0, 0.5;
    CHECK(trace(c2, kXi) ==
          doctest::Approx(std::sin(kXi) + 0.5 * std::sin(2 * kXi)).epsilon(1e-15));
}

TEST_CASE("trace is linear in the coefficients") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd c(6), d(6);
        for (int i = 0; i < 6; ++i) {
            c(i) = u(rng);
            d(i) = u(rng);
        }
        const double x = 0.5 + 2.0 * std::abs(u(rng));
        CHECK(trace((c + d).eval(), x) ==
              doctest::Approx(trace(c, x) + trace(d, x)).epsilon(1e-13));
    }
}

TEST_CASE("state norm composes the four component norms") {
    const int N = 4;
    ModalState s(N);
    s.a(0) = 1.0;
    StateSpaceSpec spec = StateSpaceSpec::dual_space(kXi, kEta);
    CHECK(state_norm(s, spec) == doctest::Approx(1.0 / std::abs(std::sin(kXi))).epsilon(1e-14));

    ModalState z(N);
    CHECK(state_norm(z, spec) == 0.0);

    // figure-space single beam-velocity mode: k^2 |sin(2 eta)|
    ModalState bv(N);
    bv.b_dot(1) = 1.0;
    StateSpaceSpec fig = StateSpaceSpec::direct_space(kXi, kEta);
    CHECK(state_norm(bv, fig) == doctest::Approx(4.0 * std::abs(std::sin(2 * kEta))).epsilon(1e-14));

    // squared composite equals the sum of squared components exactly
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ModalState r(N);
    for (int i = 0; i < N; ++i) {
        r.a(i) = u(rng);
        r.a_dot(i) = u(rng);
        r.b(i) = u(rng);
        r.b_dot(i) = u(rng);
    }
    const double sum = weighted_norm_squared(r.a, spec.string_pos) +
                       weighted_norm_squared(r.a_dot, spec.string_vel) +
                       weighted_norm_squared(r.b, spec.beam_pos) +
                       weighted_norm_squared(r.b_dot, spec.beam_vel);
    CHECK(state_norm_squared(r, spec) == sum);
}

TEST_CASE("stacked ordering round-trips") {
    ModalState s(3);
    s.a << 1, 2, 3;
    s.b << 4, 5, 6;
    s.a_dot << 7, 8, 9;
    s.b_dot << 10, 11, 12;
    const Eigen::VectorXd x = s.stacked();
    CHECK(x(0) == 1);
    CHECK(x(3) == 4);   // beam positions follow string positions
    CHECK(x(6) == 7);   // then string velocities
    CHECK(x(9) == 10);  // then beam velocities
    const ModalState back = ModalState::from_stacked(x);
    CHECK(back.a == s.a);
    CHECK(back.b == s.b);
    CHECK(back.a_dot == s.a_dot);
    CHECK(back.b_dot == s.b_dot);
}

TEST_CASE("degeneracy profile flags rational actuation points") {
    // xi = pi/2 kills every even mode
    const SystemConfig bad(0, 0, 0, 0, kPi / 2.0, kEta, 7);
    const DegeneracyReport rep = degeneracy_profile(bad);
    CHECK(rep.flagged_modes() == std::vector<int>{2, 4, 6});
    CHECK(rep.min_weight_xi < kDegenerateWeightTol);
    CHECK_THROWS_AS(require_nondegenerate(bad, "test"), DegenerateModeError);

    const SystemConfig two(0, 0, 0, 0, kPi / 2.0, kEta, 2);
    const DegeneracyReport rep2 = degeneracy_profile(two);
    REQUIRE(rep2.flagged_modes() == std::vector<int>{2});
    CHECK(rep2.entries[1].weight_xi == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("degeneracy profile passes the benchmark points") {
    const DegeneracyReport rep = degeneracy_profile(bench_config());
    CHECK_FALSE(rep.any_flagged());
    // direct evaluation of all 14 sines
    double min_xi = 1, min_eta = 1;
    for (int k = 1; k <= 7; ++k) {
        min_xi = std::min(min_xi, std::abs(std::sin(k * kXi)));
        min_eta = std::min(min_eta, std::abs(std::sin(k * kEta)));
    }
    CHECK(rep.min_weight_xi == doctest::Approx(min_xi).epsilon(1e-15));
    CHECK(rep.min_weight_eta == doctest::Approx(min_eta).epsilon(1e-15));
    CHECK(rep.min_weight_xi > kDegenerateWeightTol);

    const SystemConfig one(1.0, 2.0, 3.0, 4.0, kXi, kEta, 1);
    CHECK_FALSE(degeneracy_profile(one).any_flagged());
}
