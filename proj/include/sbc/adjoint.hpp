#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <vector>

#include "sbc/errors.hpp"
#include "sbc/scalar.hpp"
#include "sbc/system.hpp"

namespace sbc {

// Eigenvector matrices with condition number beyond this are treated as
// defective; Gramian closed forms require a clean eigenbasis.
inline constexpr double kDefectiveCondTol = 1e8;

// How the adjoint trajectories entering the Gramian are produced.
//   coupled:   eigen-solutions of the coupled mode system as written,
//              second-order matrix [[k^2+A, C], [B, k^4+D]].
//   dual:      eigen-solutions of the coupling-transposed system (B and C
//              swapped), the exact dual flow of the controlled system; this
//              is the variant whose Gramian feedback carries the decay
//              guarantee when B != C.
//   uncoupled: per-mode closed forms at zero coupling (frequencies k, k^2),
//              the explicit-formula scheme.
enum class AdjointMode { coupled, dual, uncoupled };

inline const char* to_string(AdjointMode m) {
    switch (m) {
        case AdjointMode::coupled: return "coupled";
        case AdjointMode::dual: return "dual";
        case AdjointMode::uncoupled: return "uncoupled";
    }
    return "?";
}

// One mode of the adjoint system in second-order form
// (alpha_k, beta_k)'' + M2 (alpha_k, beta_k) = 0.
template <typename Scalar>
struct ModeSystem {
    using Complex = std::complex<Scalar>;

    int k = 0;
    Eigen::Matrix<Scalar, 2, 2> M2;
    std::array<Complex, 2> mu;           // eigenvalues of M2
    Eigen::Matrix<Complex, 2, 2> V;      // unit eigenvector columns
    Scalar cond_V = Scalar(0);
    bool diagonalizable = false;
};

namespace detail {

template <typename Scalar>
std::complex<Scalar> complex_sqrt(const std::complex<Scalar>& z) {
    using std::abs;
    using std::sqrt;
    const Scalar r = abs(z);
    if (r == Scalar(0)) return {Scalar(0), Scalar(0)};
    // principal branch via half-angle identities; avoids atan2 requirements
    Scalar re = sqrt((r + z.real()) / Scalar(2));
    Scalar im = sqrt((r - z.real()) / Scalar(2));
    if (z.imag() < Scalar(0)) im = -im;
    return {re, im};
}

// Condition number of a 2x2 complex matrix from the singular values of V.
template <typename Scalar>
Scalar cond_2x2(const Eigen::Matrix<std::complex<Scalar>, 2, 2>& V) {
    using std::abs;
    using std::sqrt;
    const auto G = (V.adjoint() * V).eval();  // Hermitian PSD
    const Scalar t = G(0, 0).real() + G(1, 1).real();
    const Scalar d = abs(G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0));
    Scalar disc = t * t - Scalar(4) * d;
    if (disc < Scalar(0)) disc = Scalar(0);
    const Scalar s = sqrt(disc);
    const Scalar smax2 = (t + s) / Scalar(2);
    const Scalar smin2 = (t - s) / Scalar(2);
    if (smin2 <= Scalar(0)) return std::numeric_limits<double>::infinity();
    return sqrt(smax2 / smin2);
}

}  // namespace detail

template <typename Scalar>
ModeSystem<Scalar> mode_system(const SystemConfig& cfg, int k) {
    using Complex = std::complex<Scalar>;
    using std::abs;

    ModeSystem<Scalar> sys;
    sys.k = k;
    const Scalar p = Scalar(double(k) * double(k)) + Scalar(cfg.A);
    const Scalar q = Scalar(double(k) * double(k) * double(k) * double(k)) + Scalar(cfg.D);
    const Scalar b = Scalar(cfg.B);
    const Scalar c = Scalar(cfg.C);
    sys.M2 << p, c, b, q;

    const Complex disc = Complex((p - q) * (p - q) + Scalar(4) * b * c, Scalar(0));
    const Complex s = detail::complex_sqrt(disc);
    sys.mu[0] = (Complex(p + q, 0) + s) / Scalar(2);
    sys.mu[1] = (Complex(p + q, 0) - s) / Scalar(2);

    const Scalar scale = Scalar(1) + abs(p) + abs(q) + abs(b) + abs(c);
    for (int j = 0; j < 2; ++j) {
        // candidate null vectors of (M2 - mu I)
        Eigen::Matrix<Complex, 2, 1> v1, v2;
        v1 << Complex(c, 0), sys.mu[j] - p;
        v2 << sys.mu[j] - q, Complex(b, 0);
        const Scalar n1 = v1.norm();
        const Scalar n2 = v2.norm();
        Eigen::Matrix<Complex, 2, 1> v;
        if (n1 >= n2 && n1 > scale * Scalar(1e-14)) {
            v = v1 / n1;
        } else if (n2 > scale * Scalar(1e-14)) {
            v = v2 / n2;
        } else {
            // (numerically) diagonal mode system: canonical axis vectors
            v.setZero();
            v(abs(sys.M2(0, 0) - sys.mu[j].real()) <= abs(sys.M2(1, 1) - sys.mu[j].real()) ? 0
                                                                                           : 1) =
                Complex(1, 0);
        }
        sys.V.col(j) = v;
    }
    sys.cond_V = detail::cond_2x2<Scalar>(sys.V);
    bool mu_ok = true;
    for (const auto& mu : sys.mu)
        if (abs(mu) < Scalar(1e-12) * scale) mu_ok = false;
    sys.diagonalizable = mu_ok && sys.cond_V <= Scalar(kDefectiveCondTol);
    return sys;
}

// Per-mode adjoint solution as a sum of four exponentials:
//   (alpha_k, beta_k)(t) = Re sum_j amps(:, j) * exp(rates_j * t)
template <typename Scalar>
struct AdjointModeSolution {
    using Complex = std::complex<Scalar>;

    int k = 0;
    std::array<Complex, 4> rates;
    Eigen::Matrix<Complex, 2, 4> amps;

    // (alpha, beta) at time t
    Eigen::Matrix<Scalar, 2, 1> position(Scalar t) const {
        using std::exp;
        Eigen::Matrix<Complex, 2, 1> acc;
        acc.setZero();
        for (int j = 0; j < 4; ++j) acc += amps.col(j) * exp(rates[j] * t);
        return {acc(0).real(), acc(1).real()};
    }

    // (alpha', beta') at time t
    Eigen::Matrix<Scalar, 2, 1> velocity(Scalar t) const {
        using std::exp;
        Eigen::Matrix<Complex, 2, 1> acc;
        acc.setZero();
        for (int j = 0; j < 4; ++j) acc += amps.col(j) * rates[j] * exp(rates[j] * t);
        return {acc(0).real(), acc(1).real()};
    }

    Scalar max_growth_rate() const {
        Scalar r = rates[0].real();
        for (int j = 1; j < 4; ++j) r = std::max(r, rates[j].real());
        return r;
    }
};

// Closed-form amplitudes for the zero-coupling mode equations: string
// oscillation at frequency k with amplitudes (a -+ i b/k)/2, beam at k^2 with
// (alpha -+ i beta/k^2)/2.
template <typename Scalar>
AdjointModeSolution<Scalar> uncoupled_amplitudes(Scalar a, Scalar b, Scalar alpha, Scalar beta,
                                                 int k) {
    using Complex = std::complex<Scalar>;
    AdjointModeSolution<Scalar> sol;
    sol.k = k;
    const Scalar wk = Scalar(double(k));
    const Scalar wk2 = wk * wk;
    sol.rates = {Complex(0, wk), Complex(0, -wk), Complex(0, wk2), Complex(0, -wk2)};
    sol.amps.setZero();
    sol.amps(0, 0) = Complex(a / Scalar(2), -b / (Scalar(2) * wk));
    sol.amps(0, 1) = Complex(a / Scalar(2), b / (Scalar(2) * wk));
    sol.amps(1, 2) = Complex(alpha / Scalar(2), -beta / (Scalar(2) * wk2));
    sol.amps(1, 3) = Complex(alpha / Scalar(2), beta / (Scalar(2) * wk2));
    return sol;
}

// Solves one mode of the coupled adjoint system for initial data
// (alpha_k, beta_k, alpha_k', beta_k').  Throws NumericalError when the mode
// system is defective within tolerance.
template <typename Scalar>
AdjointModeSolution<Scalar> solve_mode(const SystemConfig& cfg, int k,
                                       const std::array<Scalar, 4>& init) {
    using Complex = std::complex<Scalar>;

    const ModeSystem<Scalar> sys = mode_system<Scalar>(cfg, k);
    if (!sys.diagonalizable)
        throw NumericalError("non-diagonalizable mode system at k=" + std::to_string(k) +
                             " (cond " + std::to_string(to_double(sys.cond_V)) + ")");

    // expand initial position/velocity in the eigenbasis of M2
    Eigen::Matrix<Complex, 2, 1> pos, vel;
    pos << Complex(init[0], 0), Complex(init[1], 0);
    vel << Complex(init[2], 0), Complex(init[3], 0);
    const Eigen::Matrix<Complex, 2, 2> Vinv = sys.V.inverse();
    const Eigen::Matrix<Complex, 2, 1> g0 = Vinv * pos;
    const Eigen::Matrix<Complex, 2, 1> g1 = Vinv * vel;

    AdjointModeSolution<Scalar> sol;
    sol.k = k;
    for (int j = 0; j < 2; ++j) {
        const Complex lam = Complex(0, 1) * detail::complex_sqrt(sys.mu[j]);
        const Complex pj = (g0(j) + g1(j) / lam) / Scalar(2);
        const Complex qj = (g0(j) - g1(j) / lam) / Scalar(2);
        sol.rates[2 * j] = lam;
        sol.rates[2 * j + 1] = -lam;
        sol.amps.col(2 * j) = pj * sys.V.col(j);
        sol.amps.col(2 * j + 1) = qj * sys.V.col(j);
    }
    return sol;
}

// Canonical initial data index: block 0 -> u10 (string position), block 1 ->
// u20 (beam position), block 2 -> u11 (string velocity), block 3 -> u21
// (beam velocity).  This [u10|u20|u11|u21] convention orders all 4N-vectors.
template <typename Scalar>
std::array<Scalar, 4> canonical_init(int block) {
    std::array<Scalar, 4> init{Scalar(0), Scalar(0), Scalar(0), Scalar(0)};
    switch (block) {
        case 0: init[0] = Scalar(1); break;  // alpha(0)
        case 1: init[1] = Scalar(1); break;  // beta(0)
        case 2: init[2] = Scalar(1); break;  // alpha'(0)
        case 3: init[3] = Scalar(1); break;  // beta'(0)
    }
    return init;
}

template <typename Scalar>
AdjointModeSolution<Scalar> solve_adjoint(const SystemConfig& cfg, AdjointMode mode, int k,
                                          const std::array<Scalar, 4>& init) {
    switch (mode) {
        case AdjointMode::coupled: return solve_mode<Scalar>(cfg, k, init);
        case AdjointMode::dual: return solve_mode<Scalar>(dual_of(cfg), k, init);
        case AdjointMode::uncoupled:
            return uncoupled_amplitudes<Scalar>(init[0], init[2], init[1], init[3], k);
    }
    throw ConfigError("unknown adjoint mode");
}

// Point traces (u1(t, xi), u2(t, eta)) of an adjoint solution expanded over
// modes k = 1..N.
template <typename Scalar>
std::pair<Scalar, Scalar> adjoint_traces(const SystemConfig& cfg,
                                         const std::vector<AdjointModeSolution<Scalar>>& sols,
                                         Scalar t) {
    using std::sin;
    Scalar u1(0), u2(0);
    for (const auto& sol : sols) {
        const auto pos = sol.position(t);
        u1 += pos(0) * sin(Scalar(double(sol.k)) * Scalar(cfg.xi));
        u2 += pos(1) * sin(Scalar(double(sol.k)) * Scalar(cfg.eta));
    }
    return {u1, u2};
}

}  // namespace sbc
