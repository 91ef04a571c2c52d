#pragma once

#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "sbc/sbc.hpp"

namespace sbc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitNumerical = 4;

// Feedback synthesis at one scalar precision.
template <typename Scalar>
struct SynthesisT {
    GramianT<Scalar> gramian;
    FeedbackOperatorT<Scalar> feedback;
    GalerkinModelT<Scalar> model;
    MatrixX<Scalar> closed_loop;
    Scalar abscissa = Scalar(0);
};

// Double-facing view of a synthesis that may have run at extended precision.
struct Synthesis {
    Precision precision = Precision::f64;
    std::optional<SynthesisT<double>> f64;
    std::optional<SynthesisT<xreal>> ext;

    GramianSpec spec;
    AdjointMode mode = AdjointMode::dual;
    FeedbackLaw law = FeedbackLaw::composite;
    int sign = -1;
    double min_eigenvalue = 0;
    double max_eigenvalue = 0;
    double condition = 0;
    double abscissa = 0;
    std::vector<std::string> warnings;

    Eigen::MatrixXd gramian_matrix() const;
    Eigen::MatrixXd gain() const;
    Eigen::MatrixXd block(const char* name) const;  // K11, K12, K23, K24
};

// Assembles the Gramian, inverts it, resolves the feedback sign and certifies
// the closed loop.  With PrecisionChoice::automatic the pipeline escalates
// from double to extended precision when the double Gramian is numerically
// indefinite or its condition estimate exceeds 1e12.
Synthesis synthesize(const SystemConfig& cfg, const GramianSpec& spec, AdjointMode mode,
                     FeedbackLaw law, PrecisionChoice precision, SignChoice sign);

struct CommandOutput {
    std::vector<std::string> files;
    std::string summary;  // one line, printed unless --quiet
};

CommandOutput cmd_synthesize(const RunConfig& rc);
CommandOutput cmd_simulate(const RunConfig& rc);
CommandOutput cmd_control(const RunConfig& rc);
CommandOutput cmd_observability(const RunConfig& rc);

// Full argv-level entry point: parses flags, dispatches, maps exceptions to
// the exit-code contract (0 ok, 2 config, 3 degenerate, 4 numerical).
int run_cli(const std::vector<std::string>& args);

}  // namespace sbc::cli
