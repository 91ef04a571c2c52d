#pragma once

#include <Eigen/Eigenvalues>

#include "sbc/gramian.hpp"
#include "sbc/scalar.hpp"
#include "sbc/system.hpp"

namespace sbc {

// Modal state-space model of the controlled system under the
// [a | b | a_dot | b_dot] ordering: velocities feed positions, accelerations
// are -(k^2+A) a_k - C b_k and -(k^4+D) b_k - B a_k, and the point inputs
// enter the acceleration rows with weights (2/pi) sin(k xi), (2/pi) sin(k eta).
template <typename Scalar>
struct GalerkinModelT {
    SystemConfig cfg;
    MatrixX<Scalar> A_gal;                              // 4N x 4N drift
    Eigen::Matrix<Scalar, Eigen::Dynamic, 2> B_gal;     // Dirac input columns
};

using GalerkinModel = GalerkinModelT<double>;
using GalerkinModelX = GalerkinModelT<xreal>;

template <typename Scalar>
GalerkinModelT<Scalar> build_model(const SystemConfig& cfg) {
    using std::sin;
    const int N = cfg.N;
    GalerkinModelT<Scalar> model;
    model.cfg = cfg;
    model.A_gal.setZero(4 * N, 4 * N);
    model.B_gal.setZero(4 * N, 2);

    const Scalar two_over_pi = Scalar(2) / pi_v<Scalar>();
    for (int k = 1; k <= N; ++k) {
        const int i = k - 1;
        const Scalar k2 = Scalar(double(k) * double(k));
        model.A_gal(i, 2 * N + i) = Scalar(1);
        model.A_gal(N + i, 3 * N + i) = Scalar(1);
        model.A_gal(2 * N + i, i) = -(k2 + Scalar(cfg.A));
        model.A_gal(2 * N + i, N + i) = -Scalar(cfg.C);
        model.A_gal(3 * N + i, i) = -Scalar(cfg.B);
        model.A_gal(3 * N + i, N + i) = -(k2 * k2 + Scalar(cfg.D));
        model.B_gal(2 * N + i, 0) = two_over_pi * sin(Scalar(double(k)) * Scalar(cfg.xi));
        model.B_gal(3 * N + i, 1) = two_over_pi * sin(Scalar(double(k)) * Scalar(cfg.eta));
    }
    return model;
}

inline GalerkinModel build_model(const SystemConfig& cfg) { return build_model<double>(cfg); }

template <typename Scalar>
MatrixX<Scalar> closed_loop_matrix(const GalerkinModelT<Scalar>& model,
                                   const FeedbackOperatorT<Scalar>& fb) {
    return model.A_gal + model.B_gal * fb.gain();
}

// Max real part over eigenvalues; negative abscissa certifies exponential
// decay of the LTI closed loop.
template <typename Scalar>
Scalar spectral_abscissa(const MatrixX<Scalar>& M) {
    Eigen::EigenSolver<MatrixX<Scalar>> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericalError("eigen solver failed");
    Scalar a = es.eigenvalues()(0).real();
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
        a = std::max(a, es.eigenvalues()(i).real());
    return a;
}

// Largest eigenvalue magnitude; used by the rk4 stability guard.
template <typename Scalar>
Scalar spectral_radius(const MatrixX<Scalar>& M) {
    using std::abs;
    Eigen::EigenSolver<MatrixX<Scalar>> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericalError("eigen solver failed");
    Scalar r(0);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        r = std::max(r, abs(es.eigenvalues()(i)));
    return r;
}

// Picks the feedback sign that renders the closed loop stable.  Keeps the
// default when both signs fail (the caller sees the positive abscissa).
template <typename Scalar>
int resolve_feedback_sign(const GalerkinModelT<Scalar>& model, FeedbackOperatorT<Scalar> fb) {
    fb.sign = -1;
    const Scalar a_minus = spectral_abscissa<Scalar>(closed_loop_matrix(model, fb));
    if (a_minus < Scalar(0)) return -1;
    fb.sign = +1;
    const Scalar a_plus = spectral_abscissa<Scalar>(closed_loop_matrix(model, fb));
    if (a_plus < Scalar(0)) return +1;
    return -1;
}

}  // namespace sbc
