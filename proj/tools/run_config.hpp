#pragma once

#include <optional>
#include <string>

#include "sbc/sbc.hpp"

namespace sbc::cli {

enum class PrecisionChoice { automatic, f64, extended };
enum class SignChoice { automatic, minus, plus };

// Flat key=value run configuration.  Unknown keys are rejected so a config
// file always means what it says.
struct RunConfig {
    // system
    double A = 3.0, B = 2.0, C = 1.0, D = 0.5;
    double xi = 0, eta = 0;  // parsed from tokens; defaults sqrt2/3, sqrt2/4
    int N = 7;

    // gramian / feedback synthesis; omega is required (file key or --omega)
    std::optional<double> omega;
    std::optional<double> S;  // default: GramianSpec::default_horizon(omega)
    WeightKind weight_kind = WeightKind::pure_exponential;
    AdjointMode adjoint_mode = AdjointMode::dual;
    FeedbackLaw feedback_law = FeedbackLaw::composite;
    PrecisionChoice precision = PrecisionChoice::automatic;
    SignChoice sign = SignChoice::automatic;

    // open-loop control / observability horizon
    double T = 2.0 * 3.14159265358979323846 + 0.5;

    // simulation
    double t_end = 10.0;
    double dt = 1e-3;
    Integrator method = Integrator::exact_lti;
    std::string energy_space = "dual";  // dual | direct
    double fit_start = 1.0;
    std::optional<double> fit_end;  // default min(8, t_end)

    // initial data: preset or explicit coefficient lists
    std::string init = "smooth";  // smooth | zero | explicit
    std::optional<Eigen::VectorXd> init_a, init_b, init_adot, init_bdot;

    // steering target
    std::string target = "zero";  // zero | explicit
    std::optional<Eigen::VectorXd> target_a, target_b, target_adot, target_bdot;

    std::string out_dir = "out";

    SystemConfig system() const { return SystemConfig(A, B, C, D, xi, eta, N); }
    double required_omega() const {
        if (!omega) throw ConfigError("missing required key 'omega'");
        return *omega;
    }
    GramianSpec gramian_spec() const;
    StateSpaceSpec energy_spec() const;
    ModalState initial_state() const;
    ModalState target_state() const;
    double fit_window_end() const { return fit_end ? *fit_end : std::min(8.0, t_end); }
};

// Point coordinates accept the literal tokens sqrt2/<d> and pi/<d> so
// irrational points are reproducible without user rounding.
double parse_point(const std::string& token);

RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace sbc::cli
