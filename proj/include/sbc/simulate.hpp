#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "sbc/errors.hpp"
#include "sbc/galerkin.hpp"
#include "sbc/scalar.hpp"
#include "sbc/spaces.hpp"
#include "sbc/system.hpp"

namespace sbc {

// ---------------------------------------------------------------------------
// Matrix exponential (Pade-13 with scaling and squaring, scalar-generic)
// ---------------------------------------------------------------------------

template <typename Scalar>
MatrixX<Scalar> matrix_exponential(const MatrixX<Scalar>& A) {
    using std::ceil;
    using std::log2;
    const Eigen::Index n = A.rows();
    const MatrixX<Scalar> I = MatrixX<Scalar>::Identity(n, n);

    // conservative scaling target so the Pade truncation error stays far
    // below extended-precision round-off
    const double norm1 = to_double(A.cwiseAbs().colwise().sum().maxCoeff());
    int squarings = 0;
    if (norm1 > 0.25) squarings = static_cast<int>(ceil(log2(norm1 / 0.25)));

    MatrixX<Scalar> As = A / Scalar(std::pow(2.0, squarings));
    static const double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
    const MatrixX<Scalar> A2 = As * As;
    const MatrixX<Scalar> A4 = A2 * A2;
    const MatrixX<Scalar> A6 = A2 * A4;
    const MatrixX<Scalar> U =
        As * (A6 * (Scalar(b[13]) * A6 + Scalar(b[11]) * A4 + Scalar(b[9]) * A2) +
              Scalar(b[7]) * A6 + Scalar(b[5]) * A4 + Scalar(b[3]) * A2 + Scalar(b[1]) * I);
    const MatrixX<Scalar> V = A6 * (Scalar(b[12]) * A6 + Scalar(b[10]) * A4 + Scalar(b[8]) * A2) +
                              Scalar(b[6]) * A6 + Scalar(b[4]) * A4 + Scalar(b[2]) * A2 +
                              Scalar(b[0]) * I;

    MatrixX<Scalar> E = Eigen::PartialPivLU<MatrixX<Scalar>>(V - U).solve(V + U);
    for (int i = 0; i < squarings; ++i) E = E * E;
    return E;
}

// ---------------------------------------------------------------------------
// Closed-loop integration
// ---------------------------------------------------------------------------

enum class Integrator { exact_lti, rk4 };

inline const char* to_string(Integrator m) {
    return m == Integrator::exact_lti ? "exact_lti" : "rk4";
}

template <typename Scalar>
struct TrajectoryRecordT {
    Eigen::VectorXd times;          // uniform grid
    MatrixX<Scalar> states;         // 4N x samples, [a|b|a_dot|b_dot] columns
    MatrixX<Scalar> controls;       // 2 x samples

    int samples() const { return static_cast<int>(times.size()); }

    ModalState state_at(int i) const {
        Eigen::VectorXd x(states.rows());
        for (Eigen::Index r = 0; r < states.rows(); ++r) x(r) = to_double(states(r, i));
        return ModalState::from_stacked(x);
    }

    TrajectoryRecordT<double> to_double_record() const {
        TrajectoryRecordT<double> r;
        r.times = times;
        r.states = to_double_matrix<Scalar>(states);
        r.controls = to_double_matrix<Scalar>(controls);
        return r;
    }
};

using TrajectoryRecord = TrajectoryRecordT<double>;

// Integrates x' = M x on a uniform grid, logging the feedback controls
// v = F x alongside the state.  exact_lti applies one matrix-exponential step
// operator repeatedly; rk4 is the classical fixed-step scheme with a
// stability guard dt < 1/(2 max|eigenvalue|).
template <typename Scalar>
TrajectoryRecordT<Scalar> integrate(const MatrixX<Scalar>& M,
                                    const Eigen::Matrix<Scalar, 2, Eigen::Dynamic>& F,
                                    const VectorX<Scalar>& x0, double t_end, double dt,
                                    Integrator method = Integrator::exact_lti) {
    if (!(dt > 0) || !(t_end > 0)) throw ConfigError("integration requires dt > 0 and t_end > 0");
    const int steps = static_cast<int>(std::llround(t_end / dt));
    if (steps < 1) throw ConfigError("integration window shorter than one step");

    TrajectoryRecordT<Scalar> rec;
    rec.times.resize(steps + 1);
    rec.states.resize(x0.size(), steps + 1);
    rec.controls.resize(2, steps + 1);

    MatrixX<Scalar> P;
    if (method == Integrator::exact_lti) {
        P = matrix_exponential<Scalar>(M * Scalar(dt));
    } else {
        const double rho = to_double(spectral_radius<Scalar>(M));
        if (rho > 0 && dt >= 1.0 / (2.0 * rho))
            throw NumericalError("rk4 step size " + std::to_string(dt) +
                                 " violates the stability guard 1/(2 max|eig|) = " +
                                 std::to_string(1.0 / (2.0 * rho)));
    }

    VectorX<Scalar> x = x0;
    const Scalar h(dt);
    for (int i = 0; i <= steps; ++i) {
        rec.times(i) = i * dt;
        rec.states.col(i) = x;
        rec.controls.col(i) = F * x;
        if (i == steps) break;
        if (method == Integrator::exact_lti) {
            x = P * x;
        } else {
            const VectorX<Scalar> k1 = M * x;
            const VectorX<Scalar> k2 = M * (x + (h / Scalar(2)) * k1).eval();
            const VectorX<Scalar> k3 = M * (x + (h / Scalar(2)) * k2).eval();
            const VectorX<Scalar> k4 = M * (x + h * k3).eval();
            x += (h / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
        }
    }
    if (!rec.states.allFinite()) throw NumericalError("trajectory left the finite range");
    return rec;
}

// ---------------------------------------------------------------------------
// Energies and decay diagnostics
// ---------------------------------------------------------------------------

struct EnergySeries {
    Eigen::VectorXd times;
    Eigen::VectorXd weighted;  // squared norm in a configurable state space
    Eigen::VectorXd natural;   // kinetic + elastic modal energy
};

// Natural (kinetic + elastic) energy (pi/4) sum [a'^2 + k^2 a^2 + b'^2 + k^4 b^2];
// with full_quadratic_form also the coupling terms
// (pi/4) sum [A a^2 + D b^2 + (B+C) a b], the invariant of the undamped
// system when B = C.
inline double natural_energy(const ModalState& s, const SystemConfig& cfg,
                             bool full_quadratic_form = false) {
    const double pi = pi_v<double>();
    double sum = 0;
    for (int k = 1; k <= s.modes(); ++k) {
        const int i = k - 1;
        const double k2 = double(k) * double(k);
        sum += s.a_dot(i) * s.a_dot(i) + k2 * s.a(i) * s.a(i) + s.b_dot(i) * s.b_dot(i) +
               k2 * k2 * s.b(i) * s.b(i);
        if (full_quadratic_form)
            sum += cfg.A * s.a(i) * s.a(i) + cfg.D * s.b(i) * s.b(i) +
                   (cfg.B + cfg.C) * s.a(i) * s.b(i);
    }
    return pi / 4.0 * sum;
}

inline EnergySeries energy_series(const TrajectoryRecord& rec, const StateSpaceSpec& spec,
                                  const SystemConfig& cfg, bool full_quadratic_form = false) {
    EnergySeries es;
    es.times = rec.times;
    es.weighted.resize(rec.samples());
    es.natural.resize(rec.samples());
    const Eigen::VectorXd w = state_weight_diagonal(spec, cfg.N);
    for (int i = 0; i < rec.samples(); ++i) {
        es.weighted(i) = rec.states.col(i).cwiseAbs2().dot(w);
        es.natural(i) = natural_energy(rec.state_at(i), cfg, full_quadratic_form);
    }
    return es;
}

struct DecayFit {
    double rate = 0;       // r in E(t) ~ exp(-r t)
    double intercept = 0;  // log E extrapolated to t = 0
    double residual = 0;   // rms of log-residuals on the window
};

// Least-squares fit of log E(t) = intercept - rate * t on [t_start, t_end].
inline DecayFit fit_decay_rate(const Eigen::VectorXd& times, const Eigen::VectorXd& energy,
                               double t_start, double t_end) {
    std::vector<double> ts, ys;
    for (int i = 0; i < times.size(); ++i) {
        if (times(i) < t_start || times(i) > t_end) continue;
        if (!(energy(i) > 0))
            throw NumericalError("nonpositive energy inside the fit window at t=" +
                                 std::to_string(times(i)));
        ts.push_back(times(i));
        ys.push_back(std::log(energy(i)));
    }
    if (ts.size() < 2) throw NumericalError("fit window contains fewer than two samples");

    const double n = static_cast<double>(ts.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sy += ys[i];
        stt += ts[i] * ts[i];
        sty += ts[i] * ys[i];
    }
    const double denom = n * stt - st * st;
    const double slope = (n * sty - st * sy) / denom;
    const double icept = (sy - slope * st) / n;

    double rss = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        const double r = ys[i] - (icept + slope * ts[i]);
        rss += r * r;
    }
    return {-slope, icept, std::sqrt(rss / n)};
}

// Tightest constant M such that E(t) <= M exp(-rate t) E(0) on the window.
inline double envelope_constant(const Eigen::VectorXd& times, const Eigen::VectorXd& energy,
                                double rate, double t_start, double t_end) {
    if (!(energy(0) > 0)) throw NumericalError("envelope requires positive initial energy");
    double m = 0;
    for (int i = 0; i < times.size(); ++i) {
        if (times(i) < t_start || times(i) > t_end) continue;
        m = std::max(m, energy(i) * std::exp(rate * times(i)) / energy(0));
    }
    return m;
}

}  // namespace sbc
