#pragma once

// The `ncps` command line. Everything lives in run() so the test suite can
// drive the tool in-process; ncps.cpp only forwards argv.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ncps/composite.hpp"
#include "ncps/dynamics.hpp"
#include "ncps/errors.hpp"
#include "ncps/report.hpp"
#include "ncps/representation.hpp"

namespace ncps::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 20170616ULL;

enum Exit : int { kPass = 0, kFailed = 1, kInvalid = 2 };

using nlohmann::json;

/// Shortest decimal that reads back to the same double.
inline std::string num(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t[]");
        const auto e = item.find_last_not_of(" \t[]");
        if (b == std::string::npos) continue;
        const std::string tok = item.substr(b, e - b + 1);
        double v = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw ConfigError(std::string("cannot parse ") + what + " entry '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

inline std::uint64_t seed_from_env() {
    const char* s = std::getenv("NCPS_SEED");
    if (s == nullptr || *s == '\0') return kDefaultSeed;
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw ConfigError("NCPS_SEED must be an unsigned integer");
    return v;
}

inline json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Common {
    double hbar = 1.0;
    double tol = kDefaultTol;
    std::string output;
    std::string format;
    std::string config;

    json to_json() const {
        return {{"hbar", hbar}, {"tol", tol}, {"output", output}, {"format", format}, {"config", config}};
    }
};

inline void add_common(CLI::App* sub, Common& c, const std::string& default_format,
                       const std::vector<std::string>& formats) {
    c.format = default_format;
    sub->add_option("--hbar", c.hbar, "Reduced Planck constant")->capture_default_str();
    sub->add_option("--tol", c.tol, "Check tolerance")->capture_default_str();
    sub->add_option("--output", c.output, "Write to this file instead of stdout");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember(formats))->capture_default_str();
    sub->add_option("--config", c.config, "JSON file of option values; flags override it");
}

inline json check_json(const Check& c) {
    return {{"name", c.name}, {"expected", c.expected}, {"measured", c.measured}, {"tol", c.tol}, {"pass", c.pass}};
}

/// Every JSON document the tool writes has this shape.
inline json report(const std::string& command, json config, std::vector<Check> checks, json result) {
    sort_by_name(checks);
    json arr = json::array();
    for (const auto& c : checks) arr.push_back(check_json(c));
    return {{"tool", "ncps"},
            {"version", kVersion},
            {"command", command},
            {"config", std::move(config)},
            {"checks", std::move(arr)},
            {"overall", all_pass(checks)},
            {"result", std::move(result)}};
}

inline std::string checks_csv(std::vector<Check> checks) {
    sort_by_name(checks);
    std::string s = "name,expected,measured,tol,pass\n";
    for (const auto& c : checks)
        s += c.name + "," + num(c.expected) + "," + num(c.measured) + "," + num(c.tol) + "," +
             (c.pass ? "true" : "false") + "\n";
    return s;
}

inline void emit(const std::string& text, const Common& c, std::ostream& out) {
    if (c.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file " + c.output);
    f << text;
}

inline int finish(const std::string& command, const Common& c, json config, const std::vector<Check>& checks,
                  json result, std::ostream& out) {
    if (c.format == "csv")
        emit(checks_csv(checks), c, out);
    else
        emit(report(command, std::move(config), checks, std::move(result)).dump(2) + "\n", c, out);
    return all_pass(checks) ? kPass : kFailed;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
    Common common;
    std::optional<double> theta, eta, expect_theta, expect_eta, expect_diag;
    double mass = 1.0;
    std::string family = "branch";
    std::string branch = "minus";
    bool limit = false;
    std::string scales = "1e-2,1e-4,1e-6";
    int batch = 0;
};

/// theta*eta uniform on (lo, hi), |theta/eta| log-uniform on [1e-2, 1e2], random signs.
inline std::pair<double, double> sample_pair(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> prod(-5.0, 1.0), logr(-2.0, 2.0);
    double q = 0.0;
    while (q == 0.0) q = prod(rng);
    const double r = std::pow(10.0, logr(rng));
    const double mag = std::sqrt(std::abs(q));
    const double theta = mag * std::sqrt(r), eta = std::abs(q) / theta;
    const bool flip = std::bernoulli_distribution(0.5)(rng);
    if (q > 0) return flip ? std::pair{-theta, -eta} : std::pair{theta, eta};
    return flip ? std::pair{-theta, eta} : std::pair{theta, -eta};
}

inline int run_verify_batch(const VerifyArgs& a, const json& config, std::ostream& out) {
    if (parse_family(a.family) != Family::branch) throw ConfigError("--batch runs the branch family only");
    const std::uint64_t seed = seed_from_env();
    std::mt19937_64 rng(seed);
    double closure[2] = {0, 0}, round_trip[2] = {0, 0};
    int plus_skipped = 0;
    for (int i = 0; i < a.batch; ++i) {
        const auto [theta, eta] = sample_pair(rng);
        const NCParams p{theta, eta, a.common.hbar, a.mass};
        for (Branch b : {Branch::minus, Branch::plus}) {
            const int k = b == Branch::plus;
            if (b == Branch::plus && theta * eta < 0) {
                ++plus_skipped;
                continue;
            }
            for (const auto& c : verify_nc_algebra(build_branch_rep(p, b), theta, eta, 1.0, a.common.tol).checks)
                closure[k] = std::max(closure[k], std::abs(c.measured - c.expected));
            const auto [t2, e2] = unprimed_params(primed_params(p, b));
            round_trip[k] = std::max({round_trip[k], std::abs(t2 - theta) / std::abs(theta),
                                      std::abs(e2 - eta) / std::abs(eta)});
        }
    }
    std::vector<Check> checks;
    for (Branch b : {Branch::minus, Branch::plus}) {
        const int k = b == Branch::plus;
        const std::string n(branch_name(b));
        checks.push_back(make_check("batch.closure." + n, 0.0, closure[k], a.common.tol));
        checks.push_back(make_check("batch.round_trip." + n, 0.0, round_trip[k], a.common.tol));
    }
    json cfg = config;
    cfg["seed"] = seed;
    return finish("verify", a.common, std::move(cfg), checks,
                  {{"samples", a.batch}, {"seed", seed}, {"plus_skipped_negative_product", plus_skipped}}, out);
}

inline int run_verify(const VerifyArgs& a, std::ostream& out) {
    const json config = [&] {
        json j = a.common.to_json();
        j.update({{"theta", opt(a.theta)}, {"eta", opt(a.eta)}, {"mass", a.mass}, {"family", a.family},
                  {"branch", a.branch}, {"expect_theta", opt(a.expect_theta)}, {"expect_eta", opt(a.expect_eta)},
                  {"expect_diag", opt(a.expect_diag)}, {"limit", a.limit}, {"scales", a.scales},
                  {"batch", a.batch}});
        return j;
    }();
    if (a.batch < 0) throw ConfigError("--batch must be non-negative");
    if (a.batch > 0) return run_verify_batch(a, config, out);
    if (!a.theta || !a.eta) throw ConfigError("--theta and --eta are required");

    const Family family = parse_family(a.family);
    const Branch branch = parse_branch(a.branch);
    const NCParams p{*a.theta, *a.eta, a.common.hbar, a.mass};
    p.validate();

    json result = {{"family", family_name(family)}};
    Representation r;
    if (family == Family::epsilon_general) {
        const auto pp = primed_params(p, branch);
        r = build_epsilon_rep(p, pp.theta_prime, pp.eta_prime);
        result["theta_prime"] = pp.theta_prime;
        result["eta_prime"] = pp.eta_prime;
        result["epsilon"] = epsilon_factor(pp.theta_prime, pp.eta_prime);
    } else {
        r = build_rep(p, family, branch, 0);
    }
    if (family != Family::simple) result["branch"] = branch_name(branch);

    const double heff = effective_planck(p) / p.hbar;
    const double ediag = a.expect_diag.value_or(family == Family::simple ? heff : 1.0);
    std::vector<Check> checks =
        verify_nc_algebra(r, a.expect_theta.value_or(p.theta), a.expect_eta.value_or(p.eta), ediag, a.common.tol)
            .checks;
    if (family == Family::simple) {
        checks.push_back(make_check("h_eff/hbar", 1.0 + p.product() / 4.0, heff, a.common.tol));
        result["h_eff"] = effective_planck(p);
    }
    if (family == Family::branch && p.theta > 0 && p.eta > 0)
        checks.push_back(make_check("branch_transform.residual", 0.0, branch_transform_residual(p), a.common.tol));
    if (a.limit) {
        const auto lim = check_commutative_limit(parse_list(a.scales, "--scales"), p);
        checks.insert(checks.end(), lim.checks.begin(), lim.checks.end());
        result["limit_minus_order"] = lim.minus_order ? json(*lim.minus_order) : json(nullptr);
        result["limit_plus_order"] = lim.plus_order ? json(*lim.plus_order) : json(nullptr);
    }
    return finish("verify", a.common, config, checks, std::move(result), out);
}

// ---------------------------------------------------------------------------
// repr

struct ReprArgs {
    Common common;
    double theta = 0.0, eta = 0.0, mass = 1.0;
    std::string family = "branch";
    std::string branch = "minus";
};

inline int run_repr(const ReprArgs& a, std::ostream& out) {
    json config = a.common.to_json();
    config.update({{"theta", a.theta}, {"eta", a.eta}, {"mass", a.mass}, {"family", a.family}, {"branch", a.branch}});
    const Family family = parse_family(a.family);
    const Branch branch = parse_branch(a.branch);
    const NCParams p{a.theta, a.eta, a.common.hbar, a.mass};
    p.validate();
    Representation r;
    if (family == Family::epsilon_general) {
        const auto pp = primed_params(p, branch);
        r = build_epsilon_rep(p, pp.theta_prime, pp.eta_prime);
    } else {
        r = build_rep(p, family, branch, 0);
    }
    const auto forms = r.forms();

    if (a.common.format == "text" || a.common.format == "csv") {
        std::ostringstream s;
        const bool csv = a.common.format == "csv";
        if (csv) {
            s << "form,x1,x2,p1,p2\n";
        } else {
            s << "family " << family_name(family);
            if (family != Family::simple) s << " (" << branch_name(branch) << ")";
            s << "  theta=" << num(p.theta) << " eta=" << num(p.eta) << " mass=" << num(p.mass) << "\n";
            s << std::setw(4) << "";
            for (Kind k : kAllKinds) s << std::setw(24) << kind_name(k);
            s << "\n";
        }
        for (std::size_t f = 0; f < 4; ++f) {
            if (csv)
                s << kFormNames[f];
            else
                s << std::setw(4) << kFormNames[f];
            for (Kind k : kAllKinds) {
                const std::string v = num(forms[f]->coefficient(0, k));
                if (csv)
                    s << "," << v;
                else
                    s << std::setw(24) << v;
            }
            s << "\n";
        }
        emit(s.str(), a.common, out);
        return kPass;
    }

    json table = json::object();
    for (std::size_t f = 0; f < 4; ++f) {
        json row = json::object();
        for (Kind k : kAllKinds) row[std::string(kind_name(k))] = forms[f]->coefficient(0, k);
        table[std::string(kFormNames[f])] = row;
    }
    const double ediag = family == Family::simple ? effective_planck(p) / p.hbar : 1.0;
    const auto v = verify_nc_algebra(r, r.params.theta, r.params.eta, ediag, a.common.tol);
    return finish("repr", a.common, std::move(config), v.checks,
                  {{"family", family_name(family)}, {"coefficients", std::move(table)}}, out);
}

// ---------------------------------------------------------------------------
// com

struct ComArgs {
    Common common;
    std::string masses;
    std::optional<double> gamma, alpha;
    std::string thetas, etas;
    std::string family = "branch";
    std::string branch = "minus";
};

inline int run_com(const ComArgs& a, std::ostream& out) {
    json config = a.common.to_json();
    config.update({{"masses", a.masses}, {"gamma", opt(a.gamma)}, {"alpha", opt(a.alpha)}, {"thetas", a.thetas},
                   {"etas", a.etas}, {"family", a.family}, {"branch", a.branch}});
    const Family family = parse_family(a.family);
    const Branch branch = parse_branch(a.branch);
    if (family == Family::epsilon_general) throw ConfigError("com supports the branch and simple families");
    const auto masses = parse_list(a.masses, "--masses");
    if (masses.empty()) throw ConfigError("particle list is empty");

    const bool conditions = a.gamma || a.alpha;
    const bool per_particle = !a.thetas.empty() || !a.etas.empty();
    if (conditions == per_particle) throw ConfigError("give either --gamma/--alpha or --thetas/--etas");
    if (conditions && !(a.gamma && a.alpha)) throw ConfigError("--gamma and --alpha go together");
    const CompositeSystem sys =
        conditions ? CompositeSystem::from_conditions({*a.gamma, *a.alpha}, masses, a.common.hbar)
                   : CompositeSystem::from_params(masses, parse_list(a.thetas, "--thetas"),
                                                  parse_list(a.etas, "--etas"), a.common.hbar);

    const ComparisonReport rep = family == Family::simple ? compare_com_simple(sys, a.common.tol)
                                                          : compare_com_reps(sys, branch, a.common.tol);
    std::vector<Check> checks;
    const bool agree = rep.equal == rep.shared_conditions.has_value();
    checks.push_back({"routes_agree_iff_shared_conditions", 1.0, agree ? 1.0 : 0.0, 0.0, agree});
    const double M = rep.total_mass;
    if (rep.shared_conditions) {
        const auto c = *rep.shared_conditions;
        checks.push_back(make_check("theta_tilde*M", c.gamma, rep.effective.theta_tilde * M, a.common.tol));
        checks.push_back(make_check("eta_tilde/M", c.alpha, rep.effective.eta_tilde / M, a.common.tol));
        if (rep.momentum_proportional_to_mass)
            checks.push_back({"momentum_proportional_to_mass", 1.0, *rep.momentum_proportional_to_mass ? 1.0 : 0.0,
                              0.0, *rep.momentum_proportional_to_mass});
    }

    json distances = json::object();
    for (std::size_t f = 0; f < 4; ++f) distances[std::string(kFormNames[f])] = rep.distances[f];
    json result = {{"family", family_name(family)},
                   {"particles", sys.size()},
                   {"total_mass", M},
                   {"theta_tilde", rep.effective.theta_tilde},
                   {"eta_tilde", rep.effective.eta_tilde},
                   {"routes_equal", rep.equal},
                   {"max_distance", rep.max_distance},
                   {"distances", std::move(distances)},
                   {"momentum_coefficient_per_mass", rep.momentum_coefficient_per_mass}};
    if (family != Family::simple) result["branch"] = branch_name(branch);
    result["shared_conditions"] =
        rep.shared_conditions
            ? json{{"gamma", rep.shared_conditions->gamma}, {"alpha", rep.shared_conditions->alpha}}
            : json(nullptr);
    result["conditions_form_distance"] =
        rep.conditions_form_distance ? json(*rep.conditions_form_distance) : json(nullptr);
    return finish("com", a.common, std::move(config), checks, std::move(result), out);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    Common common;
    std::string potential = "free";
    double g = 1.0, omega = 1.0;
    std::optional<double> theta, eta;
    double mass = 1.0;
    std::string family = "branch";
    std::string branch = "minus";
    double x1 = 0.0, x2 = 0.0, p1 = 1.0, p2 = 0.0;
    double t_end = 1.0, dt = 0.1;
    double drift_tol = 1e-10;
    bool wep = false;
    std::string masses = "1,2";
    std::optional<double> gamma, alpha;
    std::string initial = "0,0,1,1";
    double wep_tol = 1e-9;
    bool family_given = false;
};

inline Potential parse_potential(const SimulateArgs& a) {
    if (a.potential == "free") return Potential::free();
    if (a.potential == "gravity") return Potential::gravity(a.g);
    if (a.potential == "harmonic") return Potential::harmonic(a.omega);
    throw ConfigError("unknown potential '" + a.potential + "' (expected free|gravity|harmonic)");
}

inline json simulate_config(const SimulateArgs& a) {
    json j = a.common.to_json();
    j.update({{"potential", a.potential}, {"g", a.g}, {"omega", a.omega}, {"theta", opt(a.theta)},
              {"eta", opt(a.eta)}, {"mass", a.mass}, {"family", a.family}, {"branch", a.branch},
              {"x1", a.x1}, {"x2", a.x2}, {"p1", a.p1}, {"p2", a.p2}, {"t_end", a.t_end}, {"dt", a.dt},
              {"drift_tol", a.drift_tol}, {"wep", a.wep}});
    if (a.wep)
        j.update({{"masses", a.masses}, {"gamma", opt(a.gamma)}, {"alpha", opt(a.alpha)},
                  {"initial", a.initial}, {"wep_tol", a.wep_tol}});
    return j;
}

inline int run_wep(const SimulateArgs& a, std::ostream& out) {
    const auto masses = parse_list(a.masses, "--masses");
    if (masses.size() != 2) throw ConfigError("--masses needs exactly two values for --wep");
    const auto init = parse_list(a.initial, "--initial");
    if (init.size() != 4) throw ConfigError("--initial needs X1,X2,V1,V2");
    const bool conditions = a.gamma || a.alpha;
    if (conditions && (a.theta || a.eta)) throw ConfigError("give either --gamma/--alpha or --theta/--eta");
    if (conditions && !(a.gamma && a.alpha)) throw ConfigError("--gamma and --alpha go together");
    if (!conditions && !(a.theta && a.eta)) throw ConfigError("--wep needs --gamma/--alpha or --theta/--eta");

    const WepScenario sc{parse_potential(a), {init[0], init[1], init[2], init[3]}, a.t_end, a.dt};
    const Branch branch = parse_branch(a.branch);
    std::vector<Family> families{Family::branch, Family::simple};
    if (a.family_given) families = {parse_family(a.family)};

    std::vector<Check> checks;
    json by_family = json::object();
    double worst = 0.0;
    for (Family f : families) {
        std::array<NCParams, 2> bodies;
        for (std::size_t i = 0; i < 2; ++i)
            bodies[i] = conditions ? params_from_conditions({*a.gamma, *a.alpha}, masses[i], a.common.hbar)
                                   : NCParams{*a.theta, *a.eta, a.common.hbar, masses[i]};
        const auto r = wep_deviation(bodies, f, branch, sc);
        const std::string n(family_name(f));
        by_family[n] = {{"deviation_max", r.deviation_max}, {"energy_drift", r.energy_drift}};
        worst = std::max(worst, r.deviation_max);
        if (conditions) checks.push_back(make_check("wep.deviation." + n, 0.0, r.deviation_max, a.wep_tol));
        checks.push_back(make_check("energy_drift." + n, 0.0, r.energy_drift, a.drift_tol));
    }
    json result = {{"deviation_max", worst}, {"conditions_used", conditions}, {"masses", masses},
                   {"by_family", std::move(by_family)}};
    if (!families.empty() && families.front() != Family::simple) result["branch"] = branch_name(branch);
    return finish("simulate", a.common, simulate_config(a), checks, std::move(result), out);
}

inline int run_simulate(const SimulateArgs& a, std::ostream& out) {
    if (a.wep) return run_wep(a, out);
    const Potential pot = parse_potential(a);
    const Family family = parse_family(a.family);
    const NCParams p{a.theta.value_or(0.0), a.eta.value_or(0.0), a.common.hbar, a.mass};
    Representation rep;
    if (family == Family::epsilon_general) {
        const auto pp = primed_params(p, parse_branch(a.branch));
        rep = build_epsilon_rep(p, pp.theta_prime, pp.eta_prime);
    } else {
        rep = build_rep(p, family, parse_branch(a.branch), 0);
    }
    const auto h = build_hamiltonian(pot, rep);
    Eigen::VectorXd z0(4);
    z0 << a.x1, a.x2, a.p1, a.p2;
    const Trajectory tr = evolve(h, z0, a.t_end, a.dt);
    const std::vector<Check> checks{make_check("energy_drift", 0.0, tr.energy_drift(), a.drift_tol)};

    static constexpr const char* kColumns[] = {"t", "x1", "x2", "p1", "p2", "X1", "X2", "P1", "P2"};
    auto row_values = [&](std::size_t k) {
        std::vector<double> v{tr.times[k]};
        for (Eigen::Index i = 0; i < 4; ++i) v.push_back(tr.canonical_states[k](i));
        for (double o : tr.nc_observables[k]) v.push_back(o);
        return v;
    };
    if (a.common.format == "csv") {
        std::string s = "t,x1,x2,p1,p2,X1,X2,P1,P2\n";
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const auto v = row_values(k);
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
            s += "\n";
        }
        emit(s, a.common, out);
        return all_pass(checks) ? kPass : kFailed;
    }
    json rows = json::array();
    for (std::size_t k = 0; k < tr.size(); ++k) rows.push_back(row_values(k));
    json result = {{"columns", kColumns}, {"rows", std::move(rows)}, {"energy_drift", tr.energy_drift()}};
    return finish("simulate", a.common, simulate_config(a), checks, std::move(result), out);
}

// ---------------------------------------------------------------------------
// Config files

/// Turns a JSON object into flag tokens. Arrays become comma lists, `true`
/// becomes a bare flag, `false` and null are dropped.
inline std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    std::vector<std::string> tokens;
    for (const auto& [key, value] : j.items()) {
        std::string flag = key;
        for (char& c : flag)
            if (c == '_') c = '-';
        if (flag == "config") continue;
        flag = "--" + flag;
        auto scalar = [&](const json& v) -> std::string {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number_integer()) return std::to_string(v.get<long long>());
            if (v.is_number()) return num(v.get<double>());
            throw ConfigError("config key '" + key + "' has an unsupported value");
        };
        if (value.is_null()) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) tokens.push_back(flag);
            continue;
        }
        tokens.push_back(flag);
        if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(v);
            tokens.push_back(joined);
        } else {
            tokens.push_back(scalar(value));
        }
    }
    return tokens;
}

/// Splices config-file tokens in right after the subcommand so that later
/// command-line flags win under the take-last policy.
inline std::vector<std::string> expand_config(std::vector<std::string> args,
                                              const std::vector<std::string>& commands) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (!path) return args;
    auto it = std::find_first_of(args.begin(), args.end(), commands.begin(), commands.end());
    if (it == args.end()) return args;
    const auto tokens = config_tokens(*path);
    args.insert(it + 1, tokens.begin(), tokens.end());
    return args;
}

// ---------------------------------------------------------------------------

/// `args` excludes the program name.
inline int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Noncommutative phase-space toolkit: verification, composite systems, trajectories", "ncps"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    const std::vector<std::string> families{"epsilon", "branch", "simple"};
    const std::vector<std::string> branches{"minus", "plus"};

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Check the commutator table of a representation");
    add_common(verify, va.common, "json", {"json", "csv"});
    verify->add_option("--theta", va.theta, "Coordinate noncommutativity theta");
    verify->add_option("--eta", va.eta, "Momentum noncommutativity eta");
    verify->add_option("--mass", va.mass)->capture_default_str();
    verify->add_option("--family", va.family)->check(CLI::IsMember(families))->capture_default_str();
    verify->add_option("--branch", va.branch)->check(CLI::IsMember(branches))->capture_default_str();
    verify->add_option("--expect-theta", va.expect_theta, "Expected [X1,X2]/(i hbar); default theta");
    verify->add_option("--expect-eta", va.expect_eta, "Expected [P1,P2]/(i hbar); default eta");
    verify->add_option("--expect-diag", va.expect_diag,
                       "Expected [Xi,Pi]/(i hbar); default 1, or 1 + theta eta/4 for the simple family");
    verify->add_flag("--limit", va.limit, "Add commutative-limit checks along --scales");
    verify->add_option("--scales", va.scales, "Comma list of decreasing scales")->capture_default_str();
    verify->add_option("--batch", va.batch, "Closure and round trip over N random pairs (seed: NCPS_SEED)");

    ReprArgs ra;
    auto* repr = app.add_subcommand("repr", "Print a representation's coefficient table");
    add_common(repr, ra.common, "text", {"text", "json", "csv"});
    repr->add_option("--theta", ra.theta)->capture_default_str();
    repr->add_option("--eta", ra.eta)->capture_default_str();
    repr->add_option("--mass", ra.mass)->capture_default_str();
    repr->add_option("--family", ra.family)->check(CLI::IsMember(families))->capture_default_str();
    repr->add_option("--branch", ra.branch)->check(CLI::IsMember(branches))->capture_default_str();

    ComArgs ca;
    auto* com = app.add_subcommand("com", "Center-of-mass representation of a composite system");
    add_common(com, ca.common, "json", {"json", "csv"});
    com->add_option("--masses", ca.masses, "Comma list of particle masses");
    com->add_option("--gamma", ca.gamma, "Shared condition theta*m = gamma");
    com->add_option("--alpha", ca.alpha, "Shared condition eta/m = alpha");
    com->add_option("--thetas", ca.thetas, "Per-particle theta list");
    com->add_option("--etas", ca.etas, "Per-particle eta list");
    com->add_option("--family", ca.family)->check(CLI::IsMember(families))->capture_default_str();
    com->add_option("--branch", ca.branch)->check(CLI::IsMember(branches))->capture_default_str();

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Evolve a quadratic Hamiltonian or compare two masses (--wep)");
    add_common(sim, sa.common, "csv", {"csv", "json"});
    sim->add_option("--potential", sa.potential)
        ->check(CLI::IsMember({"free", "gravity", "harmonic"}))
        ->capture_default_str();
    sim->add_option("--g", sa.g, "Gravitational acceleration")->capture_default_str();
    sim->add_option("--omega", sa.omega, "Oscillator frequency")->capture_default_str();
    sim->add_option("--theta", sa.theta);
    sim->add_option("--eta", sa.eta);
    sim->add_option("--mass", sa.mass)->capture_default_str();
    auto* fam = sim->add_option("--family", sa.family)->check(CLI::IsMember(families))->capture_default_str();
    sim->add_option("--branch", sa.branch)->check(CLI::IsMember(branches))->capture_default_str();
    sim->add_option("--x1", sa.x1)->capture_default_str();
    sim->add_option("--x2", sa.x2)->capture_default_str();
    sim->add_option("--p1", sa.p1)->capture_default_str();
    sim->add_option("--p2", sa.p2)->capture_default_str();
    sim->add_option("--t-end", sa.t_end)->capture_default_str();
    sim->add_option("--dt", sa.dt)->capture_default_str();
    sim->add_option("--drift-tol", sa.drift_tol, "Allowed relative energy drift")->capture_default_str();
    sim->add_flag("--wep", sa.wep, "Release two masses from the same observable initial data");
    sim->add_option("--masses", sa.masses, "The two masses for --wep")->capture_default_str();
    sim->add_option("--gamma", sa.gamma);
    sim->add_option("--alpha", sa.alpha);
    sim->add_option("--initial", sa.initial, "X1,X2,dX1/dt,dX2/dt for --wep")->capture_default_str();
    sim->add_option("--wep-tol", sa.wep_tol)->capture_default_str();

    try {
        auto args = expand_config(raw_args, {"verify", "repr", "com", "simulate"});
        std::reverse(args.begin(), args.end());
        app.parse(args);
        sa.family_given = fam->count() > 0;
        // --wep writes a JSON summary unless a format was asked for.
        if (sa.wep && sim->get_option("--format")->count() == 0) sa.common.format = "json";
        if (*verify) return run_verify(va, out);
        if (*repr) return run_repr(ra, out);
        if (*com) return run_com(ca, out);
        if (sa.dt <= 0.0) throw StepError("dt must be positive");
        return run_simulate(sa, out);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "ConfigError: " << e.what() << "\n";
        return kInvalid;
    } catch (const SingularMapError& e) {
        err << e.describe() << "\n";
        return kFailed;
    } catch (const Error& e) {
        err << e.describe() << "\n";
        return kInvalid;
    }
}

}  // namespace ncps::cli
