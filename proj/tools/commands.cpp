#include "commands.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace sbc::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// synthesis pipeline
// ---------------------------------------------------------------------------

namespace {

template <typename Scalar>
SynthesisT<Scalar> synthesize_at(const SystemConfig& cfg, const GramianSpec& spec,
                                 AdjointMode mode, FeedbackLaw law, SignChoice sign) {
    SynthesisT<Scalar> s;
    s.gramian = assemble_gramian<Scalar>(cfg, spec, mode);
    if (!s.gramian.spd())
        throw NumericalError("gramian is not positive definite at this precision (min eig " +
                             std::to_string(to_double(s.gramian.min_eigenvalue)) + ")");
    s.feedback = block_inverse(s.gramian);
    s.feedback.law = law;
    s.model = build_model<Scalar>(cfg);

    if (sign == SignChoice::automatic) {
        s.feedback.sign = -1;
        s.closed_loop = closed_loop_matrix(s.model, s.feedback);
        s.abscissa = spectral_abscissa<Scalar>(s.closed_loop);
        if (!(s.abscissa < Scalar(0))) {
            s.feedback.sign = +1;
            const MatrixX<Scalar> flipped = closed_loop_matrix(s.model, s.feedback);
            const Scalar a_plus = spectral_abscissa<Scalar>(flipped);
            if (a_plus < Scalar(0)) {
                s.closed_loop = flipped;
                s.abscissa = a_plus;
            } else {
                s.feedback.sign = -1;  // neither sign stabilizes; keep the default
            }
        }
    } else {
        s.feedback.sign = (sign == SignChoice::minus) ? -1 : +1;
        s.closed_loop = closed_loop_matrix(s.model, s.feedback);
        s.abscissa = spectral_abscissa<Scalar>(s.closed_loop);
    }
    return s;
}

template <typename Scalar>
void fill_view(Synthesis& out, const SynthesisT<Scalar>& s) {
    out.sign = s.feedback.sign;
    out.min_eigenvalue = to_double(s.gramian.min_eigenvalue);
    out.max_eigenvalue = to_double(s.gramian.max_eigenvalue);
    out.condition = s.gramian.condition();
    out.abscissa = to_double(s.abscissa);
    out.warnings = s.gramian.warnings();
    if (!(s.abscissa < Scalar(0)))
        out.warnings.push_back("closed loop is unstable for both feedback signs");
}

}  // namespace

Eigen::MatrixXd Synthesis::gramian_matrix() const {
    if (ext) return to_double_matrix<xreal>(ext->gramian.matrix);
    return f64->gramian.matrix;
}

Eigen::MatrixXd Synthesis::gain() const {
    if (ext) return to_double_matrix<xreal>(MatrixX<xreal>(ext->feedback.gain()));
    return f64->feedback.gain();
}

Eigen::MatrixXd Synthesis::block(const char* name) const {
    const std::string b(name);
    auto pick = [&](const auto& fb) -> Eigen::MatrixXd {
        using S = std::decay_t<decltype(fb.K11(0, 0))>;
        if (b == "K11") return to_double_matrix<S>(fb.K11);
        if (b == "K12") return to_double_matrix<S>(fb.K12);
        if (b == "K23") return to_double_matrix<S>(fb.K23);
        return to_double_matrix<S>(fb.K24);
    };
    if (ext) return pick(ext->feedback);
    return pick(f64->feedback);
}

Synthesis synthesize(const SystemConfig& cfg, const GramianSpec& spec, AdjointMode mode,
                     FeedbackLaw law, PrecisionChoice precision, SignChoice sign) {
    require_nondegenerate(cfg, "feedback synthesis");

    Synthesis out;
    out.spec = spec;
    out.mode = mode;
    out.law = law;

    if (precision != PrecisionChoice::extended) {
        try {
            SynthesisT<double> s = synthesize_at<double>(cfg, spec, mode, law, sign);
            if (precision == PrecisionChoice::automatic && s.gramian.ill_conditioned())
                throw NumericalError("gramian condition estimate exceeds 1e12");
            out.precision = Precision::f64;
            fill_view(out, s);
            out.f64 = std::move(s);
            return out;
        } catch (const NumericalError&) {
            if (precision == PrecisionChoice::f64) throw;
            // fall through to extended precision
        }
    }

    SynthesisT<xreal> s = synthesize_at<xreal>(cfg, spec, mode, law, sign);
    out.precision = Precision::extended;
    fill_view(out, s);
    out.warnings.insert(out.warnings.begin(), "double precision insufficient; synthesis ran at "
                                              "extended (50-digit) precision");
    out.ext = std::move(s);
    return out;
}

// ---------------------------------------------------------------------------
// shared output helpers
// ---------------------------------------------------------------------------

namespace {

std::string csv_cell(double x) { return format_double(x); }

ordered_json degeneracy_json(const SystemConfig& cfg) {
    const DegeneracyReport rep = degeneracy_profile(cfg);
    ordered_json j;
    j["min_weight_xi"] = rep.min_weight_xi;
    j["argmin_xi"] = rep.argmin_xi;
    j["min_weight_eta"] = rep.min_weight_eta;
    j["argmin_eta"] = rep.argmin_eta;
    j["flagged_modes"] = rep.flagged_modes();
    return j;
}

ordered_json synthesis_json(const Synthesis& syn, const SystemConfig& cfg) {
    ordered_json j;
    j["omega"] = syn.spec.omega;
    j["S"] = syn.spec.S;
    j["weight_kind"] = to_string(syn.spec.kind);
    j["adjoint_mode"] = to_string(syn.mode);
    j["feedback_law"] = to_string(syn.law);
    j["sign"] = syn.sign;
    j["precision"] = syn.precision == Precision::extended ? "extended" : "double";
    j["condition"] = syn.condition;
    j["min_eigenvalue"] = syn.min_eigenvalue;
    j["max_eigenvalue"] = syn.max_eigenvalue;
    j["abscissa"] = syn.abscissa;
    j["degeneracy"] = degeneracy_json(cfg);
    j["warnings"] = syn.warnings;
    return j;
}

std::string trajectory_csv(const TrajectoryRecord& rec, int N) {
    std::ostringstream os;
    os << "time";
    const char* names[4] = {"a", "b", "adot", "bdot"};
    for (int blk = 0; blk < 4; ++blk)
        for (int k = 1; k <= N; ++k) os << ',' << names[blk] << '_' << k;
    os << ",v1,v2\n";
    for (int i = 0; i < rec.samples(); ++i) {
        os << csv_cell(rec.times(i));
        // column order a_1..a_N, b_1..b_N, adot_1..adot_N, bdot_1..bdot_N
        for (int r = 0; r < rec.states.rows(); ++r) os << ',' << csv_cell(rec.states(r, i));
        os << ',' << csv_cell(rec.controls(0, i)) << ',' << csv_cell(rec.controls(1, i)) << '\n';
    }
    return os.str();
}

std::string energy_csv(const EnergySeries& es) {
    std::ostringstream os;
    os << "time,E_weighted,E_natural\n";
    for (int i = 0; i < es.times.size(); ++i)
        os << csv_cell(es.times(i)) << ',' << csv_cell(es.weighted(i)) << ','
           << csv_cell(es.natural(i)) << '\n';
    return os.str();
}

std::string feedback_dump(const Synthesis& syn, int N) {
    std::ostringstream os;
    os << "feedback N=" << N << " omega=" << format_double(syn.spec.omega)
       << " sign=" << syn.sign << " law=" << to_string(syn.law) << '\n';
    os << "gain\n" << format_matrix(syn.gain());
    for (const char* b : {"K11", "K12", "K23", "K24"}) os << b << '\n' << format_matrix(syn.block(b));
    return os.str();
}

void write_json(const fs::path& p, const ordered_json& j) {
    write_file_atomic(p, j.dump(2) + "\n");
}

}  // namespace

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

CommandOutput cmd_synthesize(const RunConfig& rc) {
    const SystemConfig cfg = rc.system();
    const GramianSpec spec = rc.gramian_spec();
    const Synthesis syn =
        synthesize(cfg, spec, rc.adjoint_mode, rc.feedback_law, rc.precision, rc.sign);

    const fs::path out(rc.out_dir);
    write_file_atomic(out / "gramian.txt", format_gramian(syn.gramian_matrix(), cfg.N, spec));
    write_file_atomic(out / "feedback.txt", feedback_dump(syn, cfg.N));
    write_json(out / "synthesize.json", synthesis_json(syn, cfg));

    std::ostringstream sum;
    sum << "synthesize: omega=" << spec.omega << " min_eig=" << syn.min_eigenvalue
        << " cond=" << syn.condition << " abscissa=" << syn.abscissa << " sign=" << syn.sign;
    return {{(out / "gramian.txt").string(), (out / "feedback.txt").string(),
             (out / "synthesize.json").string()},
            sum.str()};
}

namespace {

template <typename Scalar>
TrajectoryRecord run_closed_loop(const SynthesisT<Scalar>& s, const RunConfig& rc) {
    const VectorX<Scalar> x0 = rc.initial_state().stacked().cast<Scalar>();
    const Eigen::Matrix<Scalar, 2, Eigen::Dynamic> F = s.feedback.gain();
    return integrate<Scalar>(s.closed_loop, F, x0, rc.t_end, rc.dt, rc.method)
        .to_double_record();
}

}  // namespace

CommandOutput cmd_simulate(const RunConfig& rc) {
    const SystemConfig cfg = rc.system();
    const GramianSpec spec = rc.gramian_spec();
    const Synthesis syn =
        synthesize(cfg, spec, rc.adjoint_mode, rc.feedback_law, rc.precision, rc.sign);

    const TrajectoryRecord rec =
        syn.ext ? run_closed_loop<xreal>(*syn.ext, rc) : run_closed_loop<double>(*syn.f64, rc);
    const EnergySeries es = energy_series(rec, rc.energy_spec(), cfg);

    double fitted_rate = 0, envelope_M = 0;
    std::vector<std::string> warnings = syn.warnings;
    if (es.weighted(0) > 0) {
        const DecayFit fit =
            fit_decay_rate(es.times, es.weighted, rc.fit_start, rc.fit_window_end());
        fitted_rate = fit.rate;
        envelope_M =
            envelope_constant(es.times, es.weighted, fit.rate, rc.fit_start, rc.fit_window_end());
    } else {
        warnings.push_back("zero initial energy; decay fit skipped");
    }

    const fs::path out(rc.out_dir);
    write_file_atomic(out / "trajectory.csv", trajectory_csv(rec, cfg.N));
    write_file_atomic(out / "energy.csv", energy_csv(es));

    ordered_json j = synthesis_json(syn, cfg);
    j["fitted_rate"] = fitted_rate;
    j["envelope_M"] = envelope_M;
    j["fit_start"] = rc.fit_start;
    j["fit_end"] = rc.fit_window_end();
    j["energy_space"] = rc.energy_space;
    j["t_end"] = rc.t_end;
    j["dt"] = rc.dt;
    j["method"] = to_string(rc.method);
    j["warnings"] = warnings;
    write_json(out / "simulate.json", j);

    std::ostringstream sum;
    sum << "simulate: omega=" << spec.omega << " abscissa=" << syn.abscissa
        << " fitted_rate=" << fitted_rate << " envelope_M=" << envelope_M;
    return {{(out / "trajectory.csv").string(), (out / "energy.csv").string(),
             (out / "simulate.json").string()},
            sum.str()};
}

CommandOutput cmd_control(const RunConfig& rc) {
    const SystemConfig cfg = rc.system();
    const HumControl hum =
        hum_control(cfg, rc.T, rc.initial_state(), rc.target_state(), rc.dt);

    std::ostringstream csv;
    csv << "time,v1,v2\n";
    for (int i = 0; i < hum.times.size(); ++i)
        csv << csv_cell(hum.times(i)) << ',' << csv_cell(hum.v1(i)) << ',' << csv_cell(hum.v2(i))
            << '\n';

    ordered_json j;
    j["T"] = hum.T;
    j["residual"] = hum.residual_rel;
    j["residual_abs"] = hum.residual_abs;
    j["control_energy"] = hum.control_energy;
    j["gramian_condition"] = hum.gramian_condition;
    std::vector<std::string> warnings;
    if (hum.gramian_condition > 1e12)
        warnings.push_back("window gramian condition exceeds 1e12; horizon may be too short");
    j["warnings"] = warnings;

    const fs::path out(rc.out_dir);
    write_file_atomic(out / "control.csv", csv.str());
    write_json(out / "control.json", j);

    std::ostringstream sum;
    sum << "control: T=" << hum.T << " residual=" << hum.residual_rel
        << " energy=" << hum.control_energy;
    return {{(out / "control.csv").string(), (out / "control.json").string()}, sum.str()};
}

CommandOutput cmd_observability(const RunConfig& rc) {
    const SystemConfig cfg = rc.system();
    require_nondegenerate(cfg, "observability check");
    if (!(rc.T > 0)) throw ConfigError("observability requires T > 0");

    const Gramian window = assemble_gramian<double>(cfg, GramianSpec::flat(rc.T), rc.adjoint_mode);

    // two-sided comparison against the diagonal weighted-norm quadratic form
    StateSpaceSpec norm_spec;
    norm_spec.string_pos = {0, cfg.xi, false};
    norm_spec.string_vel = {-1, cfg.xi, false};
    norm_spec.beam_pos = {0, cfg.eta, false};
    norm_spec.beam_vel = {-2, cfg.eta, false};
    const Eigen::VectorXd d = state_weight_diagonal(norm_spec, cfg.N);

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
        window.matrix, Eigen::MatrixXd(d.asDiagonal()), Eigen::EigenvaluesOnly);
    if (ges.info() != Eigen::Success) throw NumericalError("generalized eigen solver failed");
    const double c_min = ges.eigenvalues().minCoeff();
    const double c_max = ges.eigenvalues().maxCoeff();

    ordered_json j;
    j["T"] = rc.T;
    j["c_min"] = c_min;
    j["c_max"] = c_max;
    j["adjoint_mode"] = to_string(rc.adjoint_mode);
    j["degeneracy"] = degeneracy_json(cfg);

    const fs::path out(rc.out_dir);
    write_json(out / "observability.json", j);

    std::ostringstream sum;
    sum << "observability: T=" << rc.T << " c_min=" << c_min << " c_max=" << c_max;
    return {{(out / "observability.json").string()}, sum.str()};
}

// ---------------------------------------------------------------------------
// argv entry point
// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"modal string-beam pointwise stabilization toolkit"};
    app.require_subcommand(1);

    struct Flags {
        std::string config;
        std::string out;
        double omega = 0;
        bool quiet = false;
    };

    std::map<std::string, CLI::App*> subs;
    std::map<const CLI::App*, Flags> flags;
    for (const char* name : {"synthesize", "simulate", "control", "observability"}) {
        CLI::App* sub = app.add_subcommand(name);
        auto& f = flags[sub];
        sub->add_option("--config", f.config, "run configuration file (key=value)");
        sub->add_option("--out", f.out, "output directory (overrides config)");
        sub->add_option("--omega", f.omega, "decay parameter (overrides config)");
        sub->add_flag("--quiet", f.quiet, "suppress the summary line");
        subs[name] = sub;
    }

    try {
        std::vector<const char*> argv;
        argv.push_back("sbc");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            std::cout << app.help() << std::flush;
            return kExitOk;
        }
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            const Flags& f = flags[sub];
            RunConfig rc = f.config.empty() ? parse_run_config_text("") : load_run_config(f.config);
            if (sub->count("--omega")) rc.omega = f.omega;
            if (!f.out.empty()) rc.out_dir = f.out;

            CommandOutput out;
            if (name == "synthesize") out = cmd_synthesize(rc);
            else if (name == "simulate") out = cmd_simulate(rc);
            else if (name == "control") out = cmd_control(rc);
            else out = cmd_observability(rc);
            if (!f.quiet) std::cout << out.summary << "\n";
        }
        return kExitOk;
    } catch (const DegenerateModeError& e) {
        std::cerr << "degenerate configuration: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace sbc::cli
