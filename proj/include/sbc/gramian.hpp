#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <string>
#include <vector>

#include "sbc/adjoint.hpp"
#include "sbc/errors.hpp"
#include "sbc/scalar.hpp"
#include "sbc/spaces.hpp"
#include "sbc/system.hpp"

namespace sbc {

enum class WeightKind { pure_exponential, komornik_eomega };

inline const char* to_string(WeightKind k) {
    return k == WeightKind::pure_exponential ? "exponential" : "komornik";
}

// Time weight of the controllability Gramian on [0, S].
//   pure_exponential: exp(-2 omega s) on [0, S]
//   komornik_eomega:  exp(-2 omega s) on [0, T], then the linear tail
//                     2 omega exp(-2 omega T) (S - s) on [T, S], S = T + 1/(2 omega)
struct GramianSpec {
    double omega = 0;
    double S = 0;
    WeightKind kind = WeightKind::pure_exponential;
    double T = 0;  // komornik only: end of the exponential part

    static GramianSpec exponential(double omega, double S) {
        if (omega < 0) throw ConfigError("omega must be >= 0");
        if (!(S > 0)) throw ConfigError("Gramian horizon S must be > 0");
        GramianSpec g;
        g.omega = omega;
        g.S = S;
        g.kind = WeightKind::pure_exponential;
        return g;
    }

    static GramianSpec komornik(double omega, double T) {
        if (!(omega > 0)) throw ConfigError("komornik weight requires omega > 0");
        if (!(T > 0)) throw ConfigError("komornik weight requires T > 0");
        GramianSpec g;
        g.omega = omega;
        g.T = T;
        g.S = T + 1.0 / (2.0 * omega);
        g.kind = WeightKind::komornik_eomega;
        return g;
    }

    // Unweighted window Gramian on [0, T]; weight identically 1.
    static GramianSpec flat(double T) { return exponential(0.0, T); }

    // Long enough that the weight decays below e^-5 and the window exceeds
    // the controllability time 2 pi.
    static double default_horizon(double omega) {
        return std::max(2.0 * pi_v<double>() + 1.0, 5.0 / (2.0 * omega));
    }

    double weight(double s) const {
        if (kind == WeightKind::pure_exponential) return std::exp(-2.0 * omega * s);
        if (s <= T) return std::exp(-2.0 * omega * s);
        return 2.0 * omega * std::exp(-2.0 * omega * T) * (S - s);
    }
};

// ---------------------------------------------------------------------------
// Atomic weighted integral  I(lambda) = int_0^S w(s) exp(lambda s) ds
// ---------------------------------------------------------------------------

namespace detail {

// (exp(z L) - 1) / z with a short Taylor expansion across the removable
// singularity at z = 0.
template <typename Scalar>
std::complex<Scalar> expm1_over(const std::complex<Scalar>& z, Scalar L) {
    using Complex = std::complex<Scalar>;
    using std::abs;
    using std::exp;
    if (abs(z) < Scalar(1e-8)) {
        const Complex zL = z * L;
        return L * (Complex(1, 0) + zL / Scalar(2) + zL * zL / Scalar(6));
    }
    return (exp(z * L) - Complex(1, 0)) / z;
}

// int_0^L (L - r) exp(lambda r) dr, Taylor expansion near lambda = 0.
template <typename Scalar>
std::complex<Scalar> linear_tail_over(const std::complex<Scalar>& lam, Scalar L) {
    using Complex = std::complex<Scalar>;
    using std::abs;
    using std::exp;
    if (abs(lam) < Scalar(1e-8)) {
        const Scalar L2 = L * L;
        return Complex(L2 / Scalar(2), 0) + lam * (L2 * L / Scalar(6)) +
               lam * lam * (L2 * L2 / Scalar(24));
    }
    return (exp(lam * L) - Complex(1, 0)) / (lam * lam) - Complex(L, 0) / lam;
}

}  // namespace detail

template <typename Scalar>
std::complex<Scalar> oscillatory_integral(const std::complex<Scalar>& lambda,
                                          const GramianSpec& spec) {
    using Complex = std::complex<Scalar>;
    using std::exp;
    const Scalar two_omega = Scalar(2) * Scalar(spec.omega);
    if (spec.kind == WeightKind::pure_exponential) {
        return detail::expm1_over(lambda - Complex(two_omega, 0), Scalar(spec.S));
    }
    const Scalar T = Scalar(spec.T);
    const Scalar L = Scalar(spec.S) - T;
    const Complex head = detail::expm1_over(lambda - Complex(two_omega, 0), T);
    const Complex tail =
        two_omega * exp(-two_omega * T) * exp(lambda * T) * detail::linear_tail_over(lambda, L);
    return head + tail;
}

// ---------------------------------------------------------------------------
// Gramian
// ---------------------------------------------------------------------------

// Weighted controllability Gramian on canonical adjoint data under the
// [u10 | u20 | u11 | u21] ordering, with its factorization and spectrum.
template <typename Scalar>
struct GramianT {
    SystemConfig cfg;
    GramianSpec spec;
    AdjointMode mode = AdjointMode::dual;

    MatrixX<Scalar> matrix;
    Eigen::LLT<MatrixX<Scalar>> llt;
    Scalar min_eigenvalue = Scalar(0);
    Scalar max_eigenvalue = Scalar(0);
    double max_adjoint_growth = 0;  // max Re lambda over modes; > 0 flags unstable adjoint

    bool spd() const { return min_eigenvalue > Scalar(0) && llt.info() == Eigen::Success; }

    double condition() const {
        if (!(min_eigenvalue > Scalar(0))) return std::numeric_limits<double>::infinity();
        return to_double(max_eigenvalue / min_eigenvalue);
    }

    bool ill_conditioned() const { return condition() > 1e12; }

    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (ill_conditioned())
            w.push_back("gramian condition estimate exceeds 1e12; configuration is numerically "
                        "degenerate at this precision");
        if (max_adjoint_growth > 0)
            w.push_back("adjoint system has growing modes (max Re lambda = " +
                        std::to_string(max_adjoint_growth) + ")");
        return w;
    }
};

using Gramian = GramianT<double>;
using GramianX = GramianT<xreal>;

namespace detail {

// All 4N canonical per-mode solutions, indexed solutions[block][k-1].
template <typename Scalar>
std::array<std::vector<AdjointModeSolution<Scalar>>, 4> canonical_solutions(
    const SystemConfig& cfg, AdjointMode mode) {
    std::array<std::vector<AdjointModeSolution<Scalar>>, 4> sols;
    for (int block = 0; block < 4; ++block) {
        sols[block].reserve(cfg.N);
        for (int k = 1; k <= cfg.N; ++k)
            sols[block].push_back(solve_adjoint<Scalar>(cfg, mode, k, canonical_init<Scalar>(block)));
    }
    return sols;
}

template <typename Scalar>
void finish_gramian(GramianT<Scalar>& g) {
    if (!g.matrix.allFinite()) throw NumericalError("gramian assembly produced non-finite entries");
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(g.matrix, Eigen::EigenvaluesOnly);
    g.min_eigenvalue = es.eigenvalues()(0);
    g.max_eigenvalue = es.eigenvalues()(g.matrix.rows() - 1);
    g.llt.compute(g.matrix);
}

}  // namespace detail

// Closed-form assembly: each point-trace product expands into at most 16
// exponentials, so every entry is a finite sum of oscillatory integrals.
template <typename Scalar>
GramianT<Scalar> assemble_gramian(const SystemConfig& cfg, const GramianSpec& spec,
                                  AdjointMode mode = AdjointMode::dual) {
    using Complex = std::complex<Scalar>;
    using std::sin;

    const int N = cfg.N;
    const auto sols = detail::canonical_solutions<Scalar>(cfg, mode);

    VectorX<Scalar> m(N), n(N);
    for (int k = 1; k <= N; ++k) {
        m(k - 1) = sin(Scalar(double(k)) * Scalar(cfg.xi));
        n(k - 1) = sin(Scalar(double(k)) * Scalar(cfg.eta));
    }

    GramianT<Scalar> g;
    g.cfg = cfg;
    g.spec = spec;
    g.mode = mode;
    g.matrix.setZero(4 * N, 4 * N);
    for (int block = 0; block < 4; ++block)
        for (const auto& sol : sols[block])
            g.max_adjoint_growth = std::max(g.max_adjoint_growth, to_double(sol.max_growth_rate()));

    for (int p = 0; p < 4 * N; ++p) {
        const int bp = p / N, kp = p % N;
        const auto& sp = sols[bp][kp];
        for (int q = p; q < 4 * N; ++q) {
            const int bq = q / N, kq = q % N;
            const auto& sq = sols[bq][kq];
            Complex acc(0, 0);
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 4; ++j) {
                    const Complex I = oscillatory_integral<Scalar>(sp.rates[i] + sq.rates[j], spec);
                    acc += (m(kp) * m(kq) * sp.amps(0, i) * sq.amps(0, j) +
                            n(kp) * n(kq) * sp.amps(1, i) * sq.amps(1, j)) *
                           I;
                }
            }
            g.matrix(p, q) = acc.real();
            g.matrix(q, p) = acc.real();
        }
    }
    detail::finish_gramian(g);
    return g;
}

namespace detail {

// Rank-2 integrand w(s) (U1 U1^T + U2 U2^T) of the Gramian at time s.
inline Eigen::MatrixXd gramian_integrand(
    const SystemConfig& cfg, const GramianSpec& spec,
    const std::array<std::vector<AdjointModeSolution<double>>, 4>& sols, double s) {
    const int N = cfg.N;
    Eigen::VectorXd u1(4 * N), u2(4 * N);
    for (int block = 0; block < 4; ++block) {
        for (int k = 0; k < N; ++k) {
            const auto pos = sols[block][k].position(s);
            u1(block * N + k) = pos(0) * cfg.m(k);
            u2(block * N + k) = pos(1) * cfg.n(k);
        }
    }
    return spec.weight(s) * (u1 * u1.transpose() + u2 * u2.transpose());
}

inline Eigen::MatrixXd simpson(const Eigen::MatrixXd& fa, const Eigen::MatrixXd& fm,
                               const Eigen::MatrixXd& fb, double h) {
    return (h / 6.0) * (fa + 4.0 * fm + fb);
}

template <typename F>
Eigen::MatrixXd adaptive_simpson(const F& f, double a, double b, const Eigen::MatrixXd& fa,
                                 const Eigen::MatrixXd& fm, const Eigen::MatrixXd& fb,
                                 const Eigen::MatrixXd& whole, double tol, int depth) {
    if (depth > 30) throw NumericalError("gramian quadrature did not converge");
    const double m = 0.5 * (a + b);
    const Eigen::MatrixXd flm = f(0.5 * (a + m));
    const Eigen::MatrixXd frm = f(0.5 * (m + b));
    const Eigen::MatrixXd left = simpson(fa, flm, fm, m - a);
    const Eigen::MatrixXd right = simpson(fm, frm, fb, b - m);
    const Eigen::MatrixXd est = left + right;
    const double err = (est - whole).cwiseAbs().maxCoeff() / 15.0;
    if (err <= tol) return est + (est - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1);
}

template <typename F>
Eigen::MatrixXd integrate_matrix(const F& f, double a, double b, double tol) {
    const Eigen::MatrixXd fa = f(a);
    const Eigen::MatrixXd fm = f(0.5 * (a + b));
    const Eigen::MatrixXd fb = f(b);
    return adaptive_simpson(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 0);
}

}  // namespace detail

// Independent oracle for assemble_gramian: adaptive quadrature of the time
// integrand built from the adjoint point traces.
inline Gramian assemble_gramian_quadrature(const SystemConfig& cfg, const GramianSpec& spec,
                                           AdjointMode mode = AdjointMode::dual,
                                           double tol = 1e-10) {
    if (!(tol > 0)) throw ConfigError("quadrature tolerance must be > 0");
    const auto sols = detail::canonical_solutions<double>(cfg, mode);
    auto f = [&](double s) { return detail::gramian_integrand(cfg, spec, sols, s); };

    Gramian g;
    g.cfg = cfg;
    g.spec = spec;
    g.mode = mode;
    if (spec.kind == WeightKind::komornik_eomega) {
        // integrand has a kink where the exponential part meets the tail
        g.matrix = detail::integrate_matrix(f, 0.0, spec.T, tol) +
                   detail::integrate_matrix(f, spec.T, spec.S, tol);
    } else {
        g.matrix = detail::integrate_matrix(f, 0.0, spec.S, tol);
    }
    g.matrix = ((g.matrix + g.matrix.transpose()) / 2.0).eval();
    for (int block = 0; block < 4; ++block)
        for (const auto& sol : sols[block])
            g.max_adjoint_growth = std::max(g.max_adjoint_growth, sol.max_growth_rate());
    detail::finish_gramian(g);
    return g;
}

// ---------------------------------------------------------------------------
// Variational solve and feedback blocks
// ---------------------------------------------------------------------------

// L^2 mass of a plain sine mode on (0, pi); the variational right-hand side
// carries this factor per mode.
template <typename Scalar>
Scalar mode_mass() {
    return pi_v<Scalar>() / Scalar(2);
}

// Right-hand side of the variational equation for data Z under the
// [u10|u20|u11|u21] ordering: (pi/2) * [z11 | z21 | -z10 | -z20].
template <typename Scalar>
VectorX<Scalar> variational_rhs(const VectorX<Scalar>& stacked) {
    const int N = static_cast<int>(stacked.size()) / 4;
    VectorX<Scalar> rhs(4 * N);
    rhs.segment(0, N) = stacked.segment(2 * N, N);        // z11 (string velocity)
    rhs.segment(N, N) = stacked.segment(3 * N, N);        // z21 (beam velocity)
    rhs.segment(2 * N, N) = -stacked.segment(0, N);       // -z10 (string position)
    rhs.segment(3 * N, N) = -stacked.segment(N, N);       // -z20 (beam position)
    return rhs * mode_mass<Scalar>();
}

template <typename Scalar>
VectorX<Scalar> solve_variational(const GramianT<Scalar>& g, const VectorX<Scalar>& stacked) {
    if (!g.spd()) throw NumericalError("singular gramian: cannot solve variational equation");
    const VectorX<Scalar> rhs = variational_rhs<Scalar>(stacked);
    const Scalar rhs_norm = rhs.norm();
    if (rhs_norm == Scalar(0)) return VectorX<Scalar>::Zero(rhs.size());
    VectorX<Scalar> u = g.llt.solve(rhs);
    // one step of iterative refinement tightens the solve on ill-conditioned
    // gramians at no measurable cost
    u += g.llt.solve((rhs - g.matrix * u).eval());
    const Scalar resid = (g.matrix * u - rhs).norm() / rhs_norm;
    if (!(resid <= Scalar(1e-10)))
        throw NumericalError("singular gramian: variational residual " +
                             std::to_string(to_double(resid)));
    return u;
}

// U0 = L_N(Z): adjoint initial data whose Gramian pairing reproduces the
// duality pairing with Z.
inline ModalState solve_L(const Gramian& g, const ModalState& Z) {
    return ModalState::from_stacked(solve_variational<double>(g, Z.stacked()));
}

// Realization of the state feedback from the inverse Gramian.
//   composite: v = sign * (trace at xi, trace at eta) of the position blocks
//              of L_N(state) -- the full inverse acting on the swapped state.
//   blocks:    the literal four-block shortcut v1 ~ K11 a_dot - K12 a,
//              v2 ~ K23 b_dot - K24 b.
enum class FeedbackLaw { composite, blocks };

inline const char* to_string(FeedbackLaw law) {
    return law == FeedbackLaw::composite ? "composite" : "blocks";
}

template <typename Scalar>
struct FeedbackOperatorT {
    int N = 0;
    MatrixX<Scalar> K11, K12, K23, K24;  // named blocks of the inverse
    MatrixX<Scalar> inverse;             // full 4N x 4N inverse
    VectorX<Scalar> m, n;
    int sign = -1;  // default follows the -P1 L_N form
    FeedbackLaw law = FeedbackLaw::composite;

    // Gain F with v(t) = F x(t) under the [a | b | a_dot | b_dot] ordering.
    Eigen::Matrix<Scalar, 2, Eigen::Dynamic> gain() const {
        const Scalar c = Scalar(sign) * mode_mass<Scalar>();
        Eigen::Matrix<Scalar, 2, Eigen::Dynamic> F(2, 4 * N);
        if (law == FeedbackLaw::composite) {
            Eigen::Matrix<Scalar, 2, Eigen::Dynamic> W(2, 4 * N);
            W.row(0) = m.transpose() * inverse.topRows(N);
            W.row(1) = n.transpose() * inverse.middleRows(N, N);
            F.middleCols(0, N) = -c * W.middleCols(2 * N, N);
            F.middleCols(N, N) = -c * W.middleCols(3 * N, N);
            F.middleCols(2 * N, N) = c * W.middleCols(0, N);
            F.middleCols(3 * N, N) = c * W.middleCols(N, N);
        } else {
            F.setZero();
            F.row(0).segment(0, N) = -c * (m.transpose() * K12);
            F.row(0).segment(2 * N, N) = c * (m.transpose() * K11);
            F.row(1).segment(N, N) = -c * (n.transpose() * K24);
            F.row(1).segment(3 * N, N) = c * (n.transpose() * K23);
        }
        return F;
    }
};

using FeedbackOperator = FeedbackOperatorT<double>;
using FeedbackOperatorX = FeedbackOperatorT<xreal>;

template <typename Scalar>
FeedbackOperatorT<Scalar> block_inverse(const GramianT<Scalar>& g) {
    using std::sin;
    if (!g.spd()) throw NumericalError("singular gramian: cannot invert");
    const int N = g.cfg.N;
    const MatrixX<Scalar> I = MatrixX<Scalar>::Identity(4 * N, 4 * N);
    MatrixX<Scalar> inv = g.llt.solve(I);
    inv += g.llt.solve((I - g.matrix * inv).eval());  // iterative refinement
    const Scalar resid = (g.matrix * inv - I).template lpNorm<Eigen::Infinity>();
    if (!(resid <= Scalar(1e-10)))
        throw NumericalError("singular gramian: inverse reconstruction residual " +
                             std::to_string(to_double(resid)));

    FeedbackOperatorT<Scalar> fb;
    fb.N = N;
    fb.inverse = std::move(inv);
    fb.K11 = fb.inverse.block(0, 0, N, N);
    fb.K12 = fb.inverse.block(0, N, N, N);
    fb.K23 = fb.inverse.block(N, 2 * N, N, N);
    fb.K24 = fb.inverse.block(N, 3 * N, N, N);
    fb.m.resize(N);
    fb.n.resize(N);
    for (int k = 1; k <= N; ++k) {
        fb.m(k - 1) = sin(Scalar(double(k)) * Scalar(g.cfg.xi));
        fb.n(k - 1) = sin(Scalar(double(k)) * Scalar(g.cfg.eta));
    }
    return fb;
}

}  // namespace sbc
