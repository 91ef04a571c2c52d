#include "run_config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace sbc::cli {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double x = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(x)) throw std::invalid_argument("not finite");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number from '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("key '" + key + "': cannot parse integer from '" + value + "'");
    return out;
}

Eigen::VectorXd parse_list(const std::string& key, const std::string& value) {
    std::vector<double> vals;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(parse_number(key, trim(item)));
    if (vals.empty()) throw ConfigError("key '" + key + "': empty coefficient list");
    Eigen::VectorXd v(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) v(i) = vals[i];
    return v;
}

void fill(Eigen::VectorXd& dst, const std::optional<Eigen::VectorXd>& src, int N,
          const std::string& key) {
    if (!src) return;
    if (src->size() != N)
        throw ConfigError("key '" + key + "': expected " + std::to_string(N) + " coefficients, got " +
                          std::to_string(src->size()));
    dst = *src;
}

}  // namespace

double parse_point(const std::string& token) {
    const std::string t = trim(token);
    auto denom = [&](size_t prefix_len) {
        const std::string d = t.substr(prefix_len);
        if (d.empty()) throw ConfigError("point token '" + t + "': missing denominator");
        for (char c : d)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw ConfigError("point token '" + t + "': denominator must be a positive integer");
        const int k = parse_int("point", d);
        if (k <= 0) throw ConfigError("point token '" + t + "': denominator must be positive");
        return static_cast<double>(k);
    };
    if (t.rfind("sqrt2/", 0) == 0) return std::sqrt(2.0) / denom(6);
    if (t.rfind("pi/", 0) == 0) return pi_v<double>() / denom(3);
    return parse_number("point", t);
}

GramianSpec RunConfig::gramian_spec() const {
    const double w = required_omega();
    if (weight_kind == WeightKind::komornik_eomega)
        return GramianSpec::komornik(w, S ? *S : GramianSpec::default_horizon(w));
    return GramianSpec::exponential(w, S ? *S : GramianSpec::default_horizon(w));
}

StateSpaceSpec RunConfig::energy_spec() const {
    if (energy_space == "dual") return StateSpaceSpec::dual_space(xi, eta);
    if (energy_space == "direct") return StateSpaceSpec::direct_space(xi, eta);
    throw ConfigError("energy_space must be 'dual' or 'direct', got '" + energy_space + "'");
}

ModalState RunConfig::initial_state() const {
    ModalState s(N);
    if (init == "zero") return s;
    if (init == "smooth") {
        for (int k = 1; k <= N; ++k) {
            s.a(k - 1) = 1.0 / k;
            s.b(k - 1) = 1.0 / (double(k) * k);
        }
        return s;
    }
    if (init == "explicit") {
        fill(s.a, init_a, N, "a");
        fill(s.b, init_b, N, "b");
        fill(s.a_dot, init_adot, N, "adot");
        fill(s.b_dot, init_bdot, N, "bdot");
        return s;
    }
    throw ConfigError("init must be 'smooth', 'zero' or 'explicit', got '" + init + "'");
}

ModalState RunConfig::target_state() const {
    ModalState s(N);
    if (target == "zero") return s;
    if (target == "explicit") {
        fill(s.a, target_a, N, "target_a");
        fill(s.b, target_b, N, "target_b");
        fill(s.a_dot, target_adot, N, "target_adot");
        fill(s.b_dot, target_bdot, N, "target_bdot");
        return s;
    }
    throw ConfigError("target must be 'zero' or 'explicit', got '" + target + "'");
}

RunConfig parse_run_config_text(const std::string& text) {
    RunConfig rc;
    rc.xi = parse_point("sqrt2/3");
    rc.eta = parse_point("sqrt2/4");

    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + s +
                              "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = value;
    }

    for (const auto& [key, value] : kv) {
        if (key == "A") rc.A = parse_number(key, value);
        else if (key == "B") rc.B = parse_number(key, value);
        else if (key == "C") rc.C = parse_number(key, value);
        else if (key == "D") rc.D = parse_number(key, value);
        else if (key == "xi") rc.xi = parse_point(value);
        else if (key == "eta") rc.eta = parse_point(value);
        else if (key == "N") rc.N = parse_int(key, value);
        else if (key == "omega") rc.omega = parse_number(key, value);
        else if (key == "S") rc.S = parse_number(key, value);
        else if (key == "weight_kind") {
            if (value == "exponential") rc.weight_kind = WeightKind::pure_exponential;
            else if (value == "komornik") rc.weight_kind = WeightKind::komornik_eomega;
            else throw ConfigError("weight_kind must be 'exponential' or 'komornik'");
        } else if (key == "adjoint_mode") {
            if (value == "coupled") rc.adjoint_mode = AdjointMode::coupled;
            else if (value == "dual") rc.adjoint_mode = AdjointMode::dual;
            else if (value == "uncoupled") rc.adjoint_mode = AdjointMode::uncoupled;
            else throw ConfigError("adjoint_mode must be 'coupled', 'dual' or 'uncoupled'");
        } else if (key == "feedback_law") {
            if (value == "composite") rc.feedback_law = FeedbackLaw::composite;
            else if (value == "blocks") rc.feedback_law = FeedbackLaw::blocks;
            else throw ConfigError("feedback_law must be 'composite' or 'blocks'");
        } else if (key == "precision") {
            if (value == "auto") rc.precision = PrecisionChoice::automatic;
            else if (value == "double") rc.precision = PrecisionChoice::f64;
            else if (value == "extended") rc.precision = PrecisionChoice::extended;
            else throw ConfigError("precision must be 'auto', 'double' or 'extended'");
        } else if (key == "sign") {
            if (value == "auto") rc.sign = SignChoice::automatic;
            else if (value == "-1") rc.sign = SignChoice::minus;
            else if (value == "1" || value == "+1") rc.sign = SignChoice::plus;
            else throw ConfigError("sign must be 'auto', '-1' or '+1'");
        } else if (key == "T") rc.T = parse_number(key, value);
        else if (key == "t_end") rc.t_end = parse_number(key, value);
        else if (key == "dt") rc.dt = parse_number(key, value);
        else if (key == "method") {
            if (value == "exact_lti") rc.method = Integrator::exact_lti;
            else if (value == "rk4") rc.method = Integrator::rk4;
            else throw ConfigError("method must be 'exact_lti' or 'rk4'");
        } else if (key == "energy_space") rc.energy_space = value;
        else if (key == "fit_start") rc.fit_start = parse_number(key, value);
        else if (key == "fit_end") rc.fit_end = parse_number(key, value);
        else if (key == "init") rc.init = value;
        else if (key == "a") rc.init_a = parse_list(key, value);
        else if (key == "b") rc.init_b = parse_list(key, value);
        else if (key == "adot") rc.init_adot = parse_list(key, value);
        else if (key == "bdot") rc.init_bdot = parse_list(key, value);
        else if (key == "target") rc.target = value;
        else if (key == "target_a") rc.target_a = parse_list(key, value);
        else if (key == "target_b") rc.target_b = parse_list(key, value);
        else if (key == "target_adot") rc.target_adot = parse_list(key, value);
        else if (key == "target_bdot") rc.target_bdot = parse_list(key, value);
        else if (key == "out_dir") rc.out_dir = value;
        else throw ConfigError("unknown key '" + key + "'");
    }

    // validate downstream invariants before any computation starts
    rc.system();
    if (rc.omega) rc.gramian_spec();
    rc.energy_spec();
    rc.initial_state();
    rc.target_state();
    if (!(rc.T > 0)) throw ConfigError("T must be > 0");
    if (!(rc.t_end > 0)) throw ConfigError("t_end must be > 0");
    if (!(rc.dt > 0)) throw ConfigError("dt must be > 0");
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config_text(ss.str());
}

}  // namespace sbc::cli
