#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

#include "sbc/errors.hpp"
#include "sbc/scalar.hpp"

namespace sbc {

// Modes with point weight below this are invisible to the actuator/observer;
// dual weights would exceed 1e18 and Gramian conditioning becomes meaningless
// in double precision.
inline constexpr double kDegenerateWeightTol = 1e-9;

// Coupled string-beam system: coupling constants, actuation points in (0,pi),
// modal truncation order and the per-mode point weights sin(k*xi), sin(k*eta).
struct SystemConfig {
    double A = 0, B = 0, C = 0, D = 0;
    double xi = 0, eta = 0;
    int N = 0;
    Eigen::VectorXd m;  // m_k = sin(k*xi), k = 1..N
    Eigen::VectorXd n;  // n_k = sin(k*eta), k = 1..N

    SystemConfig() = default;

    SystemConfig(double A_, double B_, double C_, double D_, double xi_, double eta_, int N_)
        : A(A_), B(B_), C(C_), D(D_), xi(xi_), eta(eta_), N(N_) {
        const double pi = pi_v<double>();
        if (!(xi > 0 && xi < pi)) throw ConfigError("xi must lie in (0, pi)");
        if (!(eta > 0 && eta < pi)) throw ConfigError("eta must lie in (0, pi)");
        if (N < 1) throw ConfigError("truncation order N must be >= 1");
        m.resize(N);
        n.resize(N);
        for (int k = 1; k <= N; ++k) {
            m(k - 1) = std::sin(k * xi);
            n(k - 1) = std::sin(k * eta);
        }
    }
};

// The adjoint flow of the coupled system carries the transposed coupling.
inline SystemConfig dual_of(const SystemConfig& cfg) {
    return SystemConfig(cfg.A, cfg.C, cfg.B, cfg.D, cfg.xi, cfg.eta, cfg.N);
}

// Modal coefficients of (y1, y1_t, y2, y2_t) with respect to plain sin(kx).
struct ModalState {
    Eigen::VectorXd a;      // string displacement
    Eigen::VectorXd a_dot;  // string velocity
    Eigen::VectorXd b;      // beam displacement
    Eigen::VectorXd b_dot;  // beam velocity

    ModalState() = default;

    explicit ModalState(int N)
        : a(Eigen::VectorXd::Zero(N)),
          a_dot(Eigen::VectorXd::Zero(N)),
          b(Eigen::VectorXd::Zero(N)),
          b_dot(Eigen::VectorXd::Zero(N)) {}

    int modes() const { return static_cast<int>(a.size()); }

    bool consistent() const {
        return a.size() == a_dot.size() && a.size() == b.size() && a.size() == b_dot.size();
    }

    bool finite() const {
        return a.allFinite() && a_dot.allFinite() && b.allFinite() && b_dot.allFinite();
    }

    // Stacked 4N vector under the ordering [a | b | a_dot | b_dot],
    // i.e. positions first, velocities second. All state-space matrices
    // (Galerkin drift, Gramian, feedback) share this convention.
    Eigen::VectorXd stacked() const {
        const int N = modes();
        Eigen::VectorXd x(4 * N);
        x.segment(0, N) = a;
        x.segment(N, N) = b;
        x.segment(2 * N, N) = a_dot;
        x.segment(3 * N, N) = b_dot;
        return x;
    }

    static ModalState from_stacked(const Eigen::VectorXd& x) {
        const int N = static_cast<int>(x.size()) / 4;
        ModalState s(N);
        s.a = x.segment(0, N);
        s.b = x.segment(N, N);
        s.a_dot = x.segment(2 * N, N);
        s.b_dot = x.segment(3 * N, N);
        return s;
    }
};

struct DegeneracyEntry {
    int k;
    double weight_xi;   // |sin(k*xi)|
    double weight_eta;  // |sin(k*eta)|
    bool flagged_xi;
    bool flagged_eta;
};

struct DegeneracyReport {
    std::vector<DegeneracyEntry> entries;
    double min_weight_xi = 0;
    double min_weight_eta = 0;
    int argmin_xi = 0;
    int argmin_eta = 0;

    std::vector<int> flagged_modes() const {
        std::vector<int> out;
        for (const auto& e : entries)
            if (e.flagged_xi || e.flagged_eta) out.push_back(e.k);
        return out;
    }
    bool any_flagged() const { return !flagged_modes().empty(); }
};

// Screens every mode k <= N for point weights |sin(k*xi)|, |sin(k*eta)| that
// fall below the degeneracy threshold. Reporting only; consumers decide.
inline DegeneracyReport degeneracy_profile(const SystemConfig& cfg) {
    DegeneracyReport rep;
    rep.min_weight_xi = std::numeric_limits<double>::infinity();
    rep.min_weight_eta = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= cfg.N; ++k) {
        DegeneracyEntry e;
        e.k = k;
        e.weight_xi = std::abs(cfg.m(k - 1));
        e.weight_eta = std::abs(cfg.n(k - 1));
        e.flagged_xi = e.weight_xi < kDegenerateWeightTol;
        e.flagged_eta = e.weight_eta < kDegenerateWeightTol;
        if (e.weight_xi < rep.min_weight_xi) {
            rep.min_weight_xi = e.weight_xi;
            rep.argmin_xi = k;
        }
        if (e.weight_eta < rep.min_weight_eta) {
            rep.min_weight_eta = e.weight_eta;
            rep.argmin_eta = k;
        }
        rep.entries.push_back(e);
    }
    return rep;
}

inline void require_nondegenerate(const SystemConfig& cfg, const std::string& context) {
    auto rep = degeneracy_profile(cfg);
    if (rep.any_flagged()) {
        std::string msg = context + ": degenerate modes at the actuation points:";
        for (int k : rep.flagged_modes()) msg += " " + std::to_string(k);
        throw DegenerateModeError(msg, rep.flagged_modes());
    }
}

}  // namespace sbc
