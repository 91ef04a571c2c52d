#pragma once

#include <Eigen/Core>

#include <cmath>

#include "sbc/errors.hpp"
#include "sbc/system.hpp"

namespace sbc {

// Weighted modal space: completion of sine polynomials under
//   ||sum c_k sin(kx)||^2 = sum k^{2a} sin^2(k b) |c_k|^2   (direct)
// or the reciprocal weights for the dual space. The point b filters how each
// mode is seen by an actuator/observer placed there.
struct WeightedSpaceSpec {
    double alpha = 0;
    double beta = 0;  // point in (0, pi)
    bool dual = false;

    WeightedSpaceSpec() = default;
    WeightedSpaceSpec(double alpha_, double beta_, bool dual_ = false)
        : alpha(alpha_), beta(beta_), dual(dual_) {}
};

// Squared-norm weight of mode k.  Throws on degenerate dual weights.
inline double mode_weight(const WeightedSpaceSpec& spec, int k) {
    const double s = std::sin(k * spec.beta);
    if (!spec.dual) return std::pow(double(k), 2 * spec.alpha) * s * s;
    if (std::abs(s) < kDegenerateWeightTol)
        throw DegenerateModeError(
            "dual weight degenerate: |sin(k*beta)| below threshold at k=" + std::to_string(k),
            {k});
    return std::pow(double(k), -2 * spec.alpha) / (s * s);
}

template <typename Derived>
double weighted_norm_squared(const Eigen::MatrixBase<Derived>& c, const WeightedSpaceSpec& spec) {
    double sum = 0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double ck = static_cast<double>(c(i));
        sum += mode_weight(spec, static_cast<int>(i) + 1) * ck * ck;
    }
    return sum;
}

template <typename Derived>
double weighted_norm(const Eigen::MatrixBase<Derived>& c, const WeightedSpaceSpec& spec) {
    return std::sqrt(weighted_norm_squared(c, spec));
}

// Finite sine sum  sum_k c_k sin(k x).
template <typename Derived>
typename Derived::Scalar trace(const Eigen::MatrixBase<Derived>& c,
                               typename Derived::Scalar x) {
    using Scalar = typename Derived::Scalar;
    using std::sin;
    Scalar sum(0);
    for (Eigen::Index i = 0; i < c.size(); ++i) sum += c(i) * sin(Scalar(double(i + 1)) * x);
    return sum;
}

// Product of four weighted spaces; the composite state norm is the root of
// the sum of the four squared component norms.
struct StateSpaceSpec {
    WeightedSpaceSpec string_pos;
    WeightedSpaceSpec string_vel;
    WeightedSpaceSpec beam_pos;
    WeightedSpaceSpec beam_vel;

    // State space of the well-posedness/decay estimates: duals of
    // D^0_xi x D^-1_xi x D^0_eta x D^-2_eta.
    static StateSpaceSpec dual_space(double xi, double eta) {
        StateSpaceSpec s;
        s.string_pos = {0, xi, true};
        s.string_vel = {-1, xi, true};
        s.beam_pos = {0, eta, true};
        s.beam_vel = {-2, eta, true};
        return s;
    }

    // Direct graded space D^0_xi x D^1_xi x D^0_eta x D^2_eta used by the
    // energy plots.
    static StateSpaceSpec direct_space(double xi, double eta) {
        StateSpaceSpec s;
        s.string_pos = {0, xi, false};
        s.string_vel = {1, xi, false};
        s.beam_pos = {0, eta, false};
        s.beam_vel = {2, eta, false};
        return s;
    }
};

inline double state_norm_squared(const ModalState& s, const StateSpaceSpec& spec) {
    return weighted_norm_squared(s.a, spec.string_pos) +
           weighted_norm_squared(s.a_dot, spec.string_vel) +
           weighted_norm_squared(s.b, spec.beam_pos) +
           weighted_norm_squared(s.b_dot, spec.beam_vel);
}

inline double state_norm(const ModalState& s, const StateSpaceSpec& spec) {
    return std::sqrt(state_norm_squared(s, spec));
}

// Diagonal of the squared-norm quadratic form on stacked 4N vectors under the
// [pos1 | pos2 | vel1 | vel2] ordering used by the Gramian.
inline Eigen::VectorXd state_weight_diagonal(const StateSpaceSpec& spec, int N) {
    Eigen::VectorXd d(4 * N);
    for (int k = 1; k <= N; ++k) {
        d(k - 1) = mode_weight(spec.string_pos, k);
        d(N + k - 1) = mode_weight(spec.beam_pos, k);
        d(2 * N + k - 1) = mode_weight(spec.string_vel, k);
        d(3 * N + k - 1) = mode_weight(spec.beam_vel, k);
    }
    return d;
}

}  // namespace sbc
