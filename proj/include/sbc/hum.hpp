#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <array>
#include <complex>
#include <vector>

#include "sbc/adjoint.hpp"
#include "sbc/errors.hpp"
#include "sbc/galerkin.hpp"
#include "sbc/gramian.hpp"
#include "sbc/spaces.hpp"
#include "sbc/system.hpp"

namespace sbc {

// Minimum-energy open-loop steering of the modal system from X0 to Xtarget
// over [0, T], built on the unweighted controllability Gramian
//   Gc = int_0^T e^{A s} B B^T e^{A^T s} ds,
// with u(t) = B^T e^{A^T (T-t)} Gc^{-1} (Xtarget - e^{A T} X0).
struct HumControl {
    double T = 0;
    Eigen::VectorXd times;
    Eigen::VectorXd v1, v2;
    double control_energy = 0;       // int v1^2 + v2^2 dt, exact bilinear value
    double gramian_condition = 0;
    double solve_residual = 0;       // relative residual of the gramian solve
    double residual_abs = 0;         // |X(T) - Xtarget| in the dual state space
    double residual_rel = 0;         // relative to the steering distance
    ModalState final_state;          // forward-simulated X(T)
    std::vector<std::string> warnings;
};

namespace detail {

// Four-exponential closed form of one column of e^{A s} B restricted to one
// mode: amplitudes for (position, velocity) pairs derive from the impulse
// solutions of the free mode system.
struct ModeImpulse {
    std::array<std::complex<double>, 4> rates;
    Eigen::Matrix<std::complex<double>, 2, 4> amps;  // rows (alpha, beta)
    double scale = 0;                                // (2/pi) * point weight
};

inline std::vector<std::array<ModeImpulse, 2>> impulse_forms(const SystemConfig& cfg) {
    const double two_over_pi = 2.0 / pi_v<double>();
    std::vector<std::array<ModeImpulse, 2>> forms;
    forms.reserve(cfg.N);
    for (int k = 1; k <= cfg.N; ++k) {
        std::array<ModeImpulse, 2> f;
        const auto s1 = solve_mode<double>(cfg, k, {0, 0, 1, 0});  // string velocity impulse
        const auto s2 = solve_mode<double>(cfg, k, {0, 0, 0, 1});  // beam velocity impulse
        f[0].rates = s1.rates;
        f[0].amps = s1.amps;
        f[0].scale = two_over_pi * cfg.m(k - 1);
        f[1].rates = s2.rates;
        f[1].amps = s2.amps;
        f[1].scale = two_over_pi * cfg.n(k - 1);
        forms.push_back(f);
    }
    return forms;
}

// amplitude of stacked component (slot, mode) in column c of e^{A s} B
inline std::complex<double> stacked_amp(const ModeImpulse& f, int slot, int term) {
    switch (slot) {
        case 0: return f.scale * f.amps(0, term);                   // a
        case 1: return f.scale * f.amps(1, term);                   // b
        case 2: return f.scale * f.amps(0, term) * f.rates[term];   // a_dot
        default: return f.scale * f.amps(1, term) * f.rates[term];  // b_dot
    }
}

}  // namespace detail

inline HumControl hum_control(const SystemConfig& cfg, double T, const ModalState& X0,
                              const ModalState& Xtarget, double dt = 1e-3) {
    using Complex = std::complex<double>;
    if (!(T > 0)) throw ConfigError("controllability horizon T must be > 0");
    require_nondegenerate(cfg, "open-loop control");

    const int N = cfg.N;
    const GramianSpec window = GramianSpec::flat(T);
    const auto forms = detail::impulse_forms(cfg);

    // controllability Gramian, entry (p, q) over both input columns
    Eigen::MatrixXd Gc(4 * N, 4 * N);
    for (int p = 0; p < 4 * N; ++p) {
        const int slot_p = p / N, kp = p % N;
        for (int q = p; q < 4 * N; ++q) {
            const int slot_q = q / N, kq = q % N;
            Complex acc(0, 0);
            for (int c = 0; c < 2; ++c) {
                const auto& fp = forms[kp][c];
                const auto& fq = forms[kq][c];
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j)
                        acc += detail::stacked_amp(fp, slot_p, i) *
                               detail::stacked_amp(fq, slot_q, j) *
                               oscillatory_integral<double>(fp.rates[i] + fq.rates[j], window);
            }
            Gc(p, q) = acc.real();
            Gc(q, p) = acc.real();
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gc, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues()(0);
    const double max_eig = es.eigenvalues()(4 * N - 1);

    // free flight of the initial state
    Eigen::VectorXd drift(4 * N);
    for (int k = 1; k <= N; ++k) {
        const auto sol = solve_mode<double>(
            cfg, k, {X0.a(k - 1), X0.b(k - 1), X0.a_dot(k - 1), X0.b_dot(k - 1)});
        const auto pos = sol.position(T);
        const auto vel = sol.velocity(T);
        drift(k - 1) = pos(0);
        drift(N + k - 1) = pos(1);
        drift(2 * N + k - 1) = vel(0);
        drift(3 * N + k - 1) = vel(1);
    }
    const Eigen::VectorXd delta = Xtarget.stacked() - drift;

    HumControl out;
    out.T = T;
    out.gramian_condition =
        min_eig > 0 ? max_eig / min_eig : std::numeric_limits<double>::infinity();

    Eigen::VectorXd eta = Eigen::VectorXd::Zero(4 * N);
    if (delta.norm() > 0) {
        // LDLT tolerates the near-semidefinite gramians of short horizons;
        // the solve residual is reported so callers can judge the result
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Gc);
        if (ldlt.info() != Eigen::Success || !(min_eig > 0))
            throw NumericalError("singular controllability gramian on [0, T]");
        eta = ldlt.solve(delta);
        eta += ldlt.solve((delta - Gc * eta).eval());
        if (!eta.allFinite()) throw NumericalError("controllability gramian solve diverged");
        out.solve_residual = (Gc * eta - delta).norm() / delta.norm();
        if (out.solve_residual > 1e-8)
            out.warnings.push_back("gramian solve residual " +
                                   std::to_string(out.solve_residual) +
                                   " exceeds 1e-8; steering accuracy is limited");
    }
    if (out.gramian_condition > 1e12)
        out.warnings.push_back("window gramian condition exceeds 1e12; horizon may be too short");
    out.control_energy = eta.dot(Gc * eta);

    // closed form u_c(t) = sum over modes/terms of coef * exp(rate (T - t))
    std::array<std::vector<Complex>, 2> coef;
    coef[0].assign(4 * N, Complex(0, 0));
    coef[1].assign(4 * N, Complex(0, 0));
    auto control_at = [&](double t) {
        std::array<double, 2> u{0, 0};
        for (int c = 0; c < 2; ++c) {
            Complex acc(0, 0);
            for (int k = 0; k < N; ++k) {
                const auto& f = forms[k][c];
                for (int term = 0; term < 4; ++term) {
                    Complex w(0, 0);
                    for (int slot = 0; slot < 4; ++slot)
                        w += eta(slot * N + k) * detail::stacked_amp(f, slot, term);
                    acc += w * std::exp(f.rates[term] * (T - t));
                }
            }
            u[c] = acc.real();
        }
        return u;
    };

    const int steps = std::max(1, static_cast<int>(std::ceil(T / dt)));
    const double h = T / steps;
    out.times.resize(steps + 1);
    out.v1.resize(steps + 1);
    out.v2.resize(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        const double t = i * h;
        const auto u = control_at(t);
        out.times(i) = t;
        out.v1(i) = u[0];
        out.v2(i) = u[1];
    }

    // forward-simulation oracle: rk4 on x' = A x + B u(t)
    const GalerkinModel model = build_model(cfg);
    Eigen::VectorXd x = X0.stacked();
    for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        auto f = [&](double tt, const Eigen::VectorXd& xx) -> Eigen::VectorXd {
            const auto u = control_at(tt);
            return model.A_gal * xx + model.B_gal * Eigen::Vector2d(u[0], u[1]);
        };
        const Eigen::VectorXd k1 = f(t, x);
        const Eigen::VectorXd k2 = f(t + h / 2, x + (h / 2) * k1);
        const Eigen::VectorXd k3 = f(t + h / 2, x + (h / 2) * k2);
        const Eigen::VectorXd k4 = f(t + h, x + h * k3);
        x += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    out.final_state = ModalState::from_stacked(x);

    const StateSpaceSpec dual = StateSpaceSpec::dual_space(cfg.xi, cfg.eta);
    ModalState err(N);
    err.a = out.final_state.a - Xtarget.a;
    err.b = out.final_state.b - Xtarget.b;
    err.a_dot = out.final_state.a_dot - Xtarget.a_dot;
    err.b_dot = out.final_state.b_dot - Xtarget.b_dot;
    out.residual_abs = state_norm(err, dual);

    ModalState dist(N);
    dist.a = X0.a - Xtarget.a;
    dist.b = X0.b - Xtarget.b;
    dist.a_dot = X0.a_dot - Xtarget.a_dot;
    dist.b_dot = X0.b_dot - Xtarget.b_dot;
    const double denom = state_norm(dist, dual);
    out.residual_rel = denom > 0 ? out.residual_abs / denom : out.residual_abs;
    return out;
}

}  // namespace sbc
