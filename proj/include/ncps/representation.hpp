#pragma once

// Single-particle representations of the noncommutative phase-space algebra
//   [X1, X2] = i hbar theta,  [P1, P2] = i hbar eta,  [Xi, Pj] = i hbar delta_ij
// as linear forms over canonical variables of one particle.

#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ncps/algebra.hpp"
#include "ncps/errors.hpp"
#include "ncps/report.hpp"

namespace ncps {

inline constexpr double kDefaultTol = 1e-12;

struct NCParams {
    double theta = 0.0;
    double eta = 0.0;
    double hbar = 1.0;
    double mass = 1.0;

    double product() const noexcept { return theta * eta; }

    void validate() const {
        if (!std::isfinite(theta) || !std::isfinite(eta))
            throw DomainError("theta and eta must be finite");
        if (!(hbar > 0.0) || !std::isfinite(hbar)) throw DomainError("hbar must be positive");
        if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("mass must be positive");
    }
};

enum class Branch { plus, minus };
enum class Family { epsilon_general, branch, simple };

constexpr std::string_view branch_name(Branch b) noexcept { return b == Branch::plus ? "plus" : "minus"; }

constexpr std::string_view family_name(Family f) noexcept {
    switch (f) {
        case Family::epsilon_general: return "epsilon";
        case Family::branch: return "branch";
        case Family::simple: return "simple";
    }
    return "?";
}

inline Branch parse_branch(std::string_view s) {
    if (s == "plus" || s == "+") return Branch::plus;
    if (s == "minus" || s == "-") return Branch::minus;
    throw ConfigError("unknown branch '" + std::string(s) + "' (expected plus|minus)");
}

inline Family parse_family(std::string_view s) {
    if (s == "branch") return Family::branch;
    if (s == "simple") return Family::simple;
    if (s == "epsilon" || s == "epsilon_general") return Family::epsilon_general;
    throw ConfigError("unknown family '" + std::string(s) + "' (expected branch|simple|epsilon)");
}

/// Noncommutative (X1, X2, P1, P2) written over canonical variables.
struct Representation {
    LinearForm X1, X2, P1, P2;
    Family family = Family::branch;
    std::optional<Branch> branch;
    NCParams params;
    /// Owning particle; empty for center-of-mass representations that mix particles.
    std::optional<int> particle_id;

    std::array<const LinearForm*, 4> forms() const { return {&X1, &X2, &P1, &P2}; }
};

inline constexpr std::array<std::string_view, 4> kFormNames{"X1", "X2", "P1", "P2"};

/// Largest coefficient distance over the four forms.
inline double rep_distance(const Representation& a, const Representation& b) {
    double d = 0.0;
    const auto fa = a.forms();
    const auto fb = b.forms();
    for (std::size_t i = 0; i < 4; ++i) d = std::max(d, form_distance(*fa[i], *fb[i]));
    return d;
}

/// theta_a * m_a = gamma and eta_a / m_a = alpha for every particle.
struct MassConditions {
    double gamma = 0.0;
    double alpha = 0.0;
};

struct PrimedParams {
    double theta_prime = 0.0;
    double eta_prime = 0.0;
};

/// Four canonical (or canonical-like) forms a representation is built on.
struct CanonicalBasis {
    LinearForm x1, x2, p1, p2;

    static CanonicalBasis of_particle(int id) {
        return {LinearForm::var(id, Kind::x1), LinearForm::var(id, Kind::x2),
                LinearForm::var(id, Kind::p1), LinearForm::var(id, Kind::p2)};
    }
};

namespace detail {

// X1 = scale (x1 - a p2), X2 = scale (x2 + a p1),
// P1 = scale (p1 + b x2), P2 = scale (p2 - b x1).
struct Shape {
    double scale = 1.0;
    double a = 0.0;
    double b = 0.0;
};

inline Representation assemble(const CanonicalBasis& e, const Shape& s) {
    Representation r;
    const double xa = s.scale * s.a;
    const double pb = s.scale * s.b;
    r.X1 = s.scale * e.x1 - xa * e.p2;
    r.X2 = s.scale * e.x2 + xa * e.p1;
    r.P1 = s.scale * e.p1 + pb * e.x2;
    r.P2 = s.scale * e.p2 - pb * e.x1;
    return r;
}

inline void require_real_root(double theta, double eta) {
    if (theta * eta > 1.0) throw DomainError("theta*eta > 1: sqrt(1 - theta*eta) is not real");
}

// The minus branch is written with (1 - s) eliminated through
// (1 - s)(1 + s) = theta*eta, s = sqrt(1 - theta*eta). The prefactor radicand
// becomes (1 + s)/2 and the mixing coefficients theta/(1 + s), eta/(1 + s),
// which stay finite at theta*eta = 0 and for theta*eta < 0.
inline Shape branch_shape(double theta, double eta, Branch b) {
    require_real_root(theta, eta);
    const double q = theta * eta;
    const double s = std::sqrt(1.0 - q);
    const double k = 1.0 + s;
    if (b == Branch::minus) return Shape{std::sqrt(k / 2.0), theta / k, eta / k};
    if (theta == 0.0 || eta == 0.0)
        throw DegenerateError("plus branch diverges when theta or eta is zero");
    if (q < 0.0)
        throw DomainError("plus branch needs theta*eta > 0 (prefactor radicand is negative)");
    return Shape{std::sqrt(q / (2.0 * k)), k / eta, k / theta};
}

}  // namespace detail

inline double epsilon_factor(double theta_prime, double eta_prime) {
    const double d = 1.0 + theta_prime * eta_prime / 4.0;
    if (!(d > 0.0)) throw DomainError("1 + theta'*eta'/4 <= 0: epsilon is not real");
    return 1.0 / std::sqrt(d);
}

/// Primed parameters of the epsilon family reproducing (theta, eta).
inline PrimedParams primed_params(const NCParams& p, Branch b) {
    p.validate();
    detail::require_real_root(p.theta, p.eta);
    const double k = 1.0 + std::sqrt(1.0 - p.product());
    if (b == Branch::minus) return {2.0 * p.theta / k, 2.0 * p.eta / k};
    if (p.theta == 0.0 || p.eta == 0.0)
        throw DegenerateError("plus branch: theta' or eta' diverges when theta or eta is zero");
    return {2.0 * k / p.eta, 2.0 * k / p.theta};
}

/// (theta, eta) carried by an epsilon-family representation with primed parameters.
inline std::pair<double, double> unprimed_params(const PrimedParams& pp) {
    const double d = 1.0 + pp.theta_prime * pp.eta_prime / 4.0;
    return {pp.theta_prime / d, pp.eta_prime / d};
}

inline Representation build_epsilon_rep(const NCParams& p, double theta_prime, double eta_prime,
                                        int particle_id = 0) {
    p.validate();
    const double eps = epsilon_factor(theta_prime, eta_prime);
    Representation r = detail::assemble(CanonicalBasis::of_particle(particle_id),
                                        {eps, theta_prime / 2.0, eta_prime / 2.0});
    const auto [theta, eta] = unprimed_params({theta_prime, eta_prime});
    r.family = Family::epsilon_general;
    r.params = NCParams{theta, eta, p.hbar, p.mass};
    r.particle_id = particle_id;
    return r;
}

inline Representation build_branch_rep(const NCParams& p, Branch b = Branch::minus, int particle_id = 0) {
    p.validate();
    Representation r = detail::assemble(CanonicalBasis::of_particle(particle_id),
                                        detail::branch_shape(p.theta, p.eta, b));
    r.family = Family::branch;
    r.branch = b;
    r.params = p;
    r.particle_id = particle_id;
    return r;
}

/// epsilon = 1, theta' = theta, eta' = eta. Diagonal commutators become hbar_eff.
inline Representation build_simple_rep(const NCParams& p, int particle_id = 0) {
    p.validate();
    Representation r = detail::assemble(CanonicalBasis::of_particle(particle_id),
                                        {1.0, p.theta / 2.0, p.eta / 2.0});
    r.family = Family::simple;
    r.params = p;
    r.particle_id = particle_id;
    return r;
}

/// Builds the representation of `family`; `b` selects the branch for the
/// branch and epsilon families.
inline Representation build_rep(const NCParams& p, Family family, Branch b = Branch::minus,
                                int particle_id = 0) {
    switch (family) {
        case Family::simple: return build_simple_rep(p, particle_id);
        case Family::branch: return build_branch_rep(p, b, particle_id);
        case Family::epsilon_general: {
            const auto pp = primed_params(p, b);
            Representation r = build_epsilon_rep(p, pp.theta_prime, pp.eta_prime, particle_id);
            r.branch = b;
            return r;
        }
    }
    throw ConfigError("unknown family");
}

inline double effective_planck(const NCParams& p) { return p.hbar * (1.0 + p.product() / 4.0); }

struct VerificationReport {
    std::vector<Check> checks;
    bool pass = false;
};

/// All six independent commutators of the representation against
/// (theta, eta, diag, diag, 0, 0), in units of i hbar.
inline VerificationReport verify_nc_algebra(const Representation& r, double expect_theta, double expect_eta,
                                            double expect_diag, double tol = kDefaultTol) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    const double hbar = r.params.hbar;
    auto c = [&](const LinearForm& a, const LinearForm& b) { return commutator(a, b, hbar).scalar; };
    VerificationReport rep;
    rep.checks = {
        make_check("[X1,X2]", expect_theta, c(r.X1, r.X2), tol),
        make_check("[P1,P2]", expect_eta, c(r.P1, r.P2), tol),
        make_check("[X1,P1]", expect_diag, c(r.X1, r.P1), tol),
        make_check("[X2,P2]", expect_diag, c(r.X2, r.P2), tol),
        make_check("[X1,P2]", 0.0, c(r.X1, r.P2), tol),
        make_check("[X2,P1]", 0.0, c(r.X2, r.P1), tol),
    };
    rep.pass = all_pass(rep.checks);
    return rep;
}

/// Largest coefficient residual of the plus/minus branch map
///   X1- = -sqrt(theta/eta) P2+,  X2- = sqrt(theta/eta) P1+,
///   P1- =  sqrt(eta/theta) X2+,  P2- = -sqrt(eta/theta) X1+.
/// With theta, eta both negative the identities hold only up to an overall
/// sign, and the residual reports that.
inline double branch_transform_residual(const NCParams& p) {
    p.validate();
    if (!(p.theta / p.eta > 0.0))
        throw DomainError("branch transform needs theta/eta > 0 (undefined for opposite signs or zero)");
    const Representation minus = build_branch_rep(p, Branch::minus);
    const Representation plus = build_branch_rep(p, Branch::plus);
    const double r = std::sqrt(p.theta / p.eta);
    const double ir = std::sqrt(p.eta / p.theta);
    double d = form_distance(minus.X1, -r * plus.P2);
    d = std::max(d, form_distance(minus.X2, r * plus.P1));
    d = std::max(d, form_distance(minus.P1, ir * plus.X2));
    d = std::max(d, form_distance(minus.P2, -ir * plus.X1));
    return d;
}

inline bool check_branch_transform(const NCParams& p, double tol = kDefaultTol) {
    return branch_transform_residual(p) <= tol;
}

// ---------------------------------------------------------------------------
// Commutative limit

struct LimitSample {
    double scale = 0.0;
    std::optional<double> minus_distance;
    std::optional<double> plus_distance;
    std::string minus_error;
    std::string plus_error;
};

struct LimitReport {
    std::vector<LimitSample> samples;
    /// Mean empirical convergence order, log(d_k/d_k+1)/log(s_k/s_k+1).
    std::optional<double> minus_order;
    std::optional<double> plus_order;
    std::vector<Check> checks;
    bool pass = false;
};

/// Plus-branch limit: the swap map (-r p2, r p1, x2/r, -x1/r), r = sqrt(theta/eta).
inline Representation plus_limit_target(double theta_over_eta, int particle_id = 0) {
    const double r = std::sqrt(theta_over_eta);
    Representation t;
    t.X1 = LinearForm::var(particle_id, Kind::p2, -r);
    t.X2 = LinearForm::var(particle_id, Kind::p1, r);
    t.P1 = LinearForm::var(particle_id, Kind::x2, 1.0 / r);
    t.P2 = LinearForm::var(particle_id, Kind::x1, -1.0 / r);
    t.particle_id = particle_id;
    return t;
}

inline Representation identity_rep(int particle_id = 0) {
    return detail::assemble(CanonicalBasis::of_particle(particle_id), {1.0, 0.0, 0.0});
}

namespace detail {

inline std::optional<double> mean_order(const std::vector<double>& scales, const std::vector<double>& dist) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t k = 0; k + 1 < dist.size(); ++k) {
        if (!(dist[k] > 0.0) || !(dist[k + 1] > 0.0) || !(scales[k + 1] > 0.0)) continue;
        sum += std::log(dist[k] / dist[k + 1]) / std::log(scales[k] / scales[k + 1]);
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

inline bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t k = 0; k + 1 < v.size(); ++k)
        if (!(v[k + 1] < v[k])) return false;
    return true;
}

}  // namespace detail

/// Builds both branches at (s theta0, s eta0) for each scale s and measures the
/// distance of the minus branch to the identity and of the plus branch to the
/// swap map. Construction failures are recorded in the samples. An empty
/// `tol_schedule` means "distance at scale s must not exceed s".
inline LimitReport check_commutative_limit(const std::vector<double>& scales, const NCParams& p0,
                                           std::vector<double> tol_schedule = {}) {
    p0.validate();
    if (scales.empty()) throw ConfigError("scale sequence is empty");
    for (std::size_t k = 0; k < scales.size(); ++k) {
        if (!(scales[k] >= 0.0)) throw ConfigError("scales must be non-negative");
        if (k > 0 && !(scales[k] < scales[k - 1])) throw ConfigError("scales must be strictly decreasing");
    }
    if (tol_schedule.empty()) tol_schedule = scales;
    if (tol_schedule.size() != scales.size()) throw ConfigError("tol_schedule must match the scale sequence");

    LimitReport report;
    const Representation ident = identity_rep();
    const bool ratio_ok = p0.theta / p0.eta > 0.0;
    std::optional<Representation> swap;
    if (ratio_ok) swap = plus_limit_target(p0.theta / p0.eta);

    std::vector<double> ms, md, ps, pd;
    for (std::size_t k = 0; k < scales.size(); ++k) {
        const double s = scales[k];
        NCParams p = p0;
        p.theta = s * p0.theta;
        p.eta = s * p0.eta;
        LimitSample sample{s, std::nullopt, std::nullopt, {}, {}};
        try {
            sample.minus_distance = rep_distance(build_branch_rep(p, Branch::minus), ident);
        } catch (const Error& e) {
            sample.minus_error = e.describe();
        }
        if (!ratio_ok) {
            sample.plus_error = "DomainError: theta0/eta0 <= 0, swap map undefined";
        } else {
            try {
                sample.plus_distance = rep_distance(build_branch_rep(p, Branch::plus), *swap);
            } catch (const Error& e) {
                sample.plus_error = e.describe();
            }
        }
        const std::string at = "@" + format_number(s);
        if (sample.minus_distance) {
            report.checks.push_back(make_check("limit.minus.distance" + at, 0.0, *sample.minus_distance,
                                               tol_schedule[k]));
            ms.push_back(s);
            md.push_back(*sample.minus_distance);
        }
        if (sample.plus_distance) {
            report.checks.push_back(make_check("limit.plus.distance" + at, 0.0, *sample.plus_distance,
                                               tol_schedule[k]));
            ps.push_back(s);
            pd.push_back(*sample.plus_distance);
        }
        report.samples.push_back(std::move(sample));
    }

    auto flag = [](std::string name, bool ok) { return Check{std::move(name), 1.0, ok ? 1.0 : 0.0, 0.0, ok}; };
    report.checks.push_back(flag("limit.minus.monotone", !md.empty() && detail::strictly_decreasing(md)));
    if (!pd.empty()) report.checks.push_back(flag("limit.plus.monotone", detail::strictly_decreasing(pd)));
    report.minus_order = detail::mean_order(ms, md);
    report.plus_order = detail::mean_order(ps, pd);
    if (report.minus_order && report.plus_order)
        report.checks.push_back(make_check("limit.plus.order_matches_minus", *report.minus_order,
                                           *report.plus_order, 0.25));
    report.pass = all_pass(report.checks);
    return report;
}

// ---------------------------------------------------------------------------
// Mass conditions

inline NCParams params_from_conditions(const MassConditions& c, double mass, double hbar = 1.0) {
    if (!(mass > 0.0)) throw DomainError("mass must be positive");
    if (!std::isfinite(c.gamma) || !std::isfinite(c.alpha)) throw DomainError("gamma and alpha must be finite");
    if (c.alpha * c.gamma > 1.0) throw DomainError("alpha*gamma > 1: theta*eta > 1 for every mass");
    NCParams p{c.gamma / mass, c.alpha * mass, hbar, mass};
    p.validate();
    return p;
}

struct InvarianceReport {
    std::vector<Check> checks;
    bool pass = false;
};

/// Coordinates must depend on the mass only through p/m: x-coefficients of
/// Xi and m * (p-coefficients of Xi) are the same for every mass. Momenta
/// must carry their x-part proportionally to m: p-coefficients of Pi and
/// (x-coefficients of Pi)/m are the same for every mass. Each check reports
/// the first mass's value as expected and the worst other value as measured.
inline InvarianceReport mass_invariance_report(const std::vector<NCParams>& per_mass, Family family,
                                               Branch b = Branch::minus, double tol = kDefaultTol) {
    if (per_mass.size() < 2) throw ConfigError("mass invariance needs at least two masses");
    std::set<double> distinct;
    for (const auto& p : per_mass) distinct.insert(p.mass);
    if (distinct.size() < 2) throw ConfigError("mass invariance needs at least two distinct masses");

    std::vector<Representation> reps;
    for (const auto& p : per_mass) reps.push_back(build_rep(p, family, b, 0));

    InvarianceReport report;
    for (std::size_t f = 0; f < 4; ++f) {
        const bool coordinate = f < 2;
        for (Kind k : kAllKinds) {
            // Coordinates: x-part plain, p-part times m. Momenta: p-part plain, x-part over m.
            const bool scaled = coordinate ? !is_position(k) : is_position(k);
            auto value = [&](std::size_t i) {
                const double c = reps[i].forms()[f]->coefficient(0, k);
                if (!scaled) return c;
                return coordinate ? c * per_mass[i].mass : c / per_mass[i].mass;
            };
            const double ref = value(0);
            double worst = ref;
            for (std::size_t i = 1; i < reps.size(); ++i)
                if (std::abs(value(i) - ref) > std::abs(worst - ref)) worst = value(i);
            std::string name = std::string(kFormNames[f]) + ".";
            std::string coef = "coef[" + std::string(kind_name(k)) + "]";
            name += !scaled ? coef : (coordinate ? "m*" + coef : coef + "/m");
            report.checks.push_back(make_check(std::move(name), ref, worst, tol));
        }
    }
    report.pass = all_pass(report.checks);
    return report;
}

inline InvarianceReport mass_invariance_report(const MassConditions& c, const std::vector<double>& masses,
                                               Family family, Branch b = Branch::minus,
                                               double tol = kDefaultTol, double hbar = 1.0) {
    std::vector<NCParams> per_mass;
    for (double m : masses) per_mass.push_back(params_from_conditions(c, m, hbar));
    return mass_invariance_report(per_mass, family, b, tol);
}

}  // namespace ncps
