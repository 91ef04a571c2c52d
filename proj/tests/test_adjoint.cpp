#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "sbc/adjoint.hpp"

using namespace sbc;

namespace {

const double kXi = std::sqrt(2.0) / 3.0;
const double kEta = std::sqrt(2.0) / 4.0;

SystemConfig bench_config(int N = 7) { return SystemConfig(3.0, 2.0, 1.0, 0.5, kXi, kEta, N); }
SystemConfig free_config(int N = 7) { return SystemConfig(0.0, 0.0, 0.0, 0.0, kXi, kEta, N); }

// independent oracle: classical RK4 on the first-order form of one mode,
// (alpha, beta, alpha', beta')' = (alpha', beta', -M2 (alpha, beta))
Eigen::Vector4d rk4_mode(const SystemConfig& cfg, int k, Eigen::Vector4d z, double t_end,
                         double dt) {
    const double p = double(k) * k + cfg.A;
    const double q = std::pow(double(k), 4) + cfg.D;
    auto f = [&](const Eigen::Vector4d& z_) {
        return Eigen::Vector4d(z_(2), z_(3), -p * z_(0) - cfg.C * z_(1),
                               -cfg.B * z_(0) - q * z_(1));
    };
    const int steps = static_cast<int>(std::llround(t_end / dt));
    for (int i = 0; i < steps; ++i) {
        const Eigen::Vector4d k1 = f(z);
        const Eigen::Vector4d k2 = f(z + dt / 2 * k1);
        const Eigen::Vector4d k3 = f(z + dt / 2 * k2);
        const Eigen::Vector4d k4 = f(z + dt * k3);
        z += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return z;
}

}  // namespace

TEST_CASE("mode system assembles the second-order matrix") {
    const auto sys = mode_system<double>(bench_config(), 1);
    CHECK(sys.M2(0, 0) == 4.0);   // k^2 + A
    CHECK(sys.M2(0, 1) == 1.0);   // C
    CHECK(sys.M2(1, 0) == 2.0);   // B
    CHECK(sys.M2(1, 1) == 1.5);   // k^4 + D
    CHECK(sys.diagonalizable);

    // zero coupling: eigenvalues are exactly k^2 and k^4
    const auto sys3 = mode_system<double>(free_config(), 3);
    double mus[2] = {sys3.mu[0].real(), sys3.mu[1].real()};
    std::sort(mus, mus + 2);
    CHECK(mus[0] == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(mus[1] == doctest::Approx(81.0).epsilon(1e-14));
    CHECK(sys3.mu[0].imag() == 0.0);

    // symmetric coupling keeps eigenvalues real
    const SystemConfig sym(1.0, 2.0, 2.0, 0.5, kXi, kEta, 4);
    const auto sys_sym = mode_system<double>(sym, 2);
    CHECK(std::abs(sys_sym.mu[0].imag()) < 1e-14);
    CHECK(std::abs(sys_sym.mu[1].imag()) < 1e-14);
}

TEST_CASE("uncoupled amplitudes reproduce the half-sum formulas") {
    // position-only data splits evenly between the two rotation directions
    const auto s1 = uncoupled_amplitudes<double>(1.0, 0.0, 0.0, 0.0, 3);
    CHECK(s1.amps(0, 0) == std::complex<double>(0.5, 0.0));
    CHECK(s1.amps(0, 1) == std::complex<double>(0.5, 0.0));
    CHECK(s1.rates[0] == std::complex<double>(0.0, 3.0));
    CHECK(s1.rates[1] == std::complex<double>(0.0, -3.0));
    CHECK(s1.amps.row(1).cwiseAbs().sum() == 0.0);

    // string velocity b_k = k gives amplitudes -+ i/2
    const auto s2 = uncoupled_amplitudes<double>(0.0, 4.0, 0.0, 0.0, 4);
    CHECK(s2.amps(0, 0).real() == doctest::Approx(0.0));
    CHECK(s2.amps(0, 0).imag() == doctest::Approx(-0.5));
    CHECK(s2.amps(0, 1).imag() == doctest::Approx(0.5));

    // beam velocity beta_k = k^2 likewise on the k^2 oscillation
    const auto s3 = uncoupled_amplitudes<double>(0.0, 0.0, 0.0, 9.0, 3);
    CHECK(s3.rates[2] == std::complex<double>(0.0, 9.0));
    CHECK(s3.amps(1, 2).imag() == doctest::Approx(-0.5));
    CHECK(s3.amps(1, 3).imag() == doctest::Approx(0.5));
}

TEST_CASE("solve_mode: free string mode oscillates at its own frequency only") {
    const auto sol = solve_mode<double>(free_config(), 2, {1.0, 0.0, 0.0, 0.0});
    // active rates are +-2i; beam components vanish identically
    for (int j = 0; j < 4; ++j) {
        if (std::abs(sol.amps(0, j)) > 1e-14) {
            CHECK(std::abs(sol.rates[j].real()) < 1e-14);
            CHECK(std::abs(sol.rates[j].imag()) == doctest::Approx(2.0).epsilon(1e-14));
        }
        CHECK(std::abs(sol.amps(1, j)) < 1e-14);
    }
    for (double t : {0.0, 0.7, 2.9}) {
        const auto pos = sol.position(t);
        CHECK(pos(0) == doctest::Approx(std::cos(2.0 * t)).epsilon(1e-13));
        CHECK(pos(1) == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("solve_mode: zero data gives the zero solution") {
    const auto sol = solve_mode<double>(bench_config(), 3, {0.0, 0.0, 0.0, 0.0});
    for (double t : {0.0, 1.0, 5.0}) {
        CHECK(sol.position(t).norm() == 0.0);
        CHECK(sol.velocity(t).norm() == 0.0);
    }
}

TEST_CASE("solve_mode rejects defective mode systems") {
    // B = 0, C = 1, k = 1, A = D = 0 gives the Jordan block [[1,1],[0,1]]
    const SystemConfig jordan(0.0, 0.0, 1.0, 0.0, kXi, kEta, 2);
    CHECK_THROWS_AS(solve_mode<double>(jordan, 1, {1.0, 0.0, 0.0, 0.0}), NumericalError);
}

TEST_CASE("solve_mode reproduces initial data") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const SystemConfig cfg = bench_config();
    for (int k : {1, 2, 5, 7}) {
        const std::array<double, 4> init{u(rng), u(rng), u(rng), u(rng)};
        const auto sol = solve_mode<double>(cfg, k, init);
        const auto pos = sol.position(0.0);
        const auto vel = sol.velocity(0.0);
        const double scale = 1e-12 * (1 + std::abs(init[0]) + std::abs(init[1]) +
                                      std::abs(init[2]) + std::abs(init[3]));
        CHECK(std::abs(pos(0) - init[0]) < scale);
        CHECK(std::abs(pos(1) - init[1]) < scale);
        CHECK(std::abs(vel(0) - init[2]) < scale);
        CHECK(std::abs(vel(1) - init[3]) < scale);
    }
}

TEST_CASE("frequency purity at zero coupling") {
    for (int k : {1, 2, 4, 7}) {
        const auto sol = solve_mode<double>(free_config(), k, {0.3, -0.8, 1.1, 0.4});
        for (int j = 0; j < 4; ++j) {
            CHECK(std::abs(sol.rates[j].real()) <= 1e-12);
            const double im = std::abs(sol.rates[j].imag());
            const bool string_rate = std::abs(im - k) < 1e-12;
            const bool beam_rate = std::abs(im - double(k) * k) < 1e-12;
            CHECK((string_rate || beam_rate));
        }
    }
}

TEST_CASE("solve_mode agrees with the uncoupled closed form") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, 10.0);
    const SystemConfig cfg = free_config();
    for (int k : {1, 3, 6}) {
        const std::array<double, 4> init{u(rng), u(rng), u(rng), u(rng)};
        const auto eig = solve_mode<double>(cfg, k, init);
        const auto cf = uncoupled_amplitudes<double>(init[0], init[2], init[1], init[3], k);
        for (int trial = 0; trial < 100; ++trial) {
            const double t = ut(rng);
            CHECK((eig.position(t) - cf.position(t)).norm() < 1e-12 * (1 + cf.position(t).norm()));
            CHECK((eig.velocity(t) - cf.velocity(t)).norm() <
                  1e-11 * (1 + double(k) * k * cf.velocity(t).norm()));
        }
    }
}

TEST_CASE("solve_mode is linear in the initial data") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const SystemConfig cfg = bench_config();
    for (int trial = 0; trial < 10; ++trial) {
        std::array<double, 4> i1, i2, sum;
        for (int j = 0; j < 4; ++j) {
            i1[j] = u(rng);
            i2[j] = u(rng);
            sum[j] = i1[j] + 2.5 * i2[j];
        }
        const auto s1 = solve_mode<double>(cfg, 2, i1);
        const auto s2 = solve_mode<double>(cfg, 2, i2);
        const auto ss = solve_mode<double>(cfg, 2, sum);
        for (double t : {0.4, 3.3, 9.7}) {
            const Eigen::Vector2d lhs = ss.position(t);
            const Eigen::Vector2d rhs = s1.position(t) + 2.5 * s2.position(t);
            CHECK((lhs - rhs).norm() < 1e-12 * (1 + rhs.norm()));
        }
    }
}

TEST_CASE("per-mode energy is conserved under symmetric coupling") {
    const SystemConfig sym(3.0, 2.0, 2.0, 0.5, kXi, kEta, 5);
    auto energy = [&](int k, const Eigen::Vector2d& pos, const Eigen::Vector2d& vel) {
        const double p = double(k) * k + sym.A;
        const double q = std::pow(double(k), 4) + sym.D;
        return vel.squaredNorm() + p * pos(0) * pos(0) + q * pos(1) * pos(1) +
               2.0 * sym.C * pos(0) * pos(1);
    };
    for (int k : {1, 2, 5}) {
        const auto sol = solve_mode<double>(sym, k, {1.0, -0.5, 0.3, 0.9});
        const double e0 = energy(k, sol.position(0.0), sol.velocity(0.0));
        for (double t = 0.5; t <= 10.0; t += 0.5) {
            const double et = energy(k, sol.position(t), sol.velocity(t));
            CHECK(std::abs(et - e0) <= 1e-10 * std::abs(e0));
        }
    }
}

TEST_CASE("solve_mode matches an independent time integration") {
    const SystemConfig cfg = bench_config();
    for (int k : {1, 4}) {
        const std::array<double, 4> init{0.7, -0.2, 0.1, 1.3};
        const auto sol = solve_mode<double>(cfg, k, init);
        const Eigen::Vector4d z0(init[0], init[1], init[2], init[3]);
        const double t_end = 2.0;
        const Eigen::Vector4d z = rk4_mode(cfg, k, z0, t_end, 1e-5);
        const auto pos = sol.position(t_end);
        const auto vel = sol.velocity(t_end);
        CHECK(pos(0) == doctest::Approx(z(0)).epsilon(1e-9));
        CHECK(pos(1) == doctest::Approx(z(1)).epsilon(1e-9));
        CHECK(vel(0) == doctest::Approx(z(2)).epsilon(1e-9));
        CHECK(vel(1) == doctest::Approx(z(3)).epsilon(1e-9));
    }
}

TEST_CASE("dual mode solves the coupling-transposed system") {
    const SystemConfig cfg = bench_config();
    const auto direct = solve_adjoint<double>(dual_of(cfg), AdjointMode::coupled, 2,
                                              {0.5, 0.25, -1.0, 0.75});
    const auto via_mode =
        solve_adjoint<double>(cfg, AdjointMode::dual, 2, {0.5, 0.25, -1.0, 0.75});
    for (double t : {0.0, 1.7, 6.2}) {
        CHECK((direct.position(t) - via_mode.position(t)).norm() < 1e-14);
    }
    const auto sys = mode_system<double>(dual_of(cfg), 1);
    CHECK(sys.M2(0, 1) == 2.0);  // B and C swapped
    CHECK(sys.M2(1, 0) == 1.0);
}

TEST_CASE("adjoint traces: zero data and closed forms") {
    const SystemConfig cfg = free_config(3);
    std::vector<AdjointModeSolution<double>> zero;
    for (int k = 1; k <= 3; ++k)
        zero.push_back(solve_mode<double>(cfg, k, {0.0, 0.0, 0.0, 0.0}));
    for (double t : {0.0, 1.1, 4.4}) {
        const auto [u1, u2] = adjoint_traces<double>(cfg, zero, t);
        CHECK(u1 == 0.0);
        CHECK(u2 == 0.0);
    }

    // only a_1 = 1: u1(t, xi) = cos(t) sin(xi)
    std::vector<AdjointModeSolution<double>> s1;
    s1.push_back(solve_mode<double>(cfg, 1, {1.0, 0.0, 0.0, 0.0}));
    for (int k = 2; k <= 3; ++k) s1.push_back(solve_mode<double>(cfg, k, {0.0, 0.0, 0.0, 0.0}));
    for (double t : {0.3, 2.0, 7.5}) {
        const auto [u1, u2] = adjoint_traces<double>(cfg, s1, t);
        CHECK(u1 == doctest::Approx(std::cos(t) * std::sin(kXi)).epsilon(1e-13));
        CHECK(u2 == doctest::Approx(0.0).epsilon(1e-14));
    }

    // only beta'_2 = 4 (beam velocity): u2(t, eta) = sin(4t) sin(2 eta)
    std::vector<AdjointModeSolution<double>> s2;
    s2.push_back(solve_mode<double>(cfg, 1, {0.0, 0.0, 0.0, 0.0}));
    s2.push_back(solve_mode<double>(cfg, 2, {0.0, 0.0, 0.0, 4.0}));
    s2.push_back(solve_mode<double>(cfg, 3, {0.0, 0.0, 0.0, 0.0}));
    for (double t : {0.3, 2.0, 7.5}) {
        const auto [u1, u2] = adjoint_traces<double>(cfg, s2, t);
        CHECK(u1 == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(u2 == doctest::Approx(std::sin(4.0 * t) * std::sin(2.0 * kEta)).epsilon(1e-13));
        // cross-check against the independent integrator
        const Eigen::Vector4d z = rk4_mode(cfg, 2, Eigen::Vector4d(0, 0, 0, 4.0), t, 1e-5);
        CHECK(u2 == doctest::Approx(z(1) * std::sin(2.0 * kEta)).epsilon(1e-8));
    }
}
