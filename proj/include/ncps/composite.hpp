#pragma once

// Center-of-mass observables of a multi-particle system
//   X~ = sum m_a X(a) / M,  P~ = sum P(a)
// built two ways: from the effective parameters (theta~, eta~) over the
// canonical center-of-mass forms, and by summing per-particle representations.

#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ncps/algebra.hpp"
#include "ncps/errors.hpp"
#include "ncps/representation.hpp"

namespace ncps {

struct Particle {
    int id = 0;
    double mass = 1.0;
    NCParams params;
    /// Representation family this particle is declared with, if any.
    std::optional<Family> family;
};

class CompositeSystem {
  public:
    explicit CompositeSystem(std::vector<Particle> particles) : particles_(std::move(particles)) {
        if (particles_.empty()) throw ConfigError("composite system needs at least one particle");
        std::set<int> ids;
        long double total = 0.0L;
        for (const auto& p : particles_) {
            if (!(p.mass > 0.0) || !std::isfinite(p.mass)) throw DomainError("particle mass must be positive");
            if (p.params.mass != p.mass) throw ConfigError("particle params.mass must equal its mass");
            if (p.params.hbar != particles_.front().params.hbar)
                throw ConfigError("all particles must share one hbar");
            p.params.validate();
            if (!ids.insert(p.id).second) throw ConfigError("duplicate particle id " + std::to_string(p.id));
            total += p.mass;
        }
        total_mass_ = static_cast<double>(total);
    }

    /// Particles 0..n-1 with theta = gamma/m, eta = alpha*m.
    static CompositeSystem from_conditions(const MassConditions& c, const std::vector<double>& masses,
                                           double hbar = 1.0) {
        std::vector<Particle> ps;
        for (std::size_t i = 0; i < masses.size(); ++i)
            ps.push_back({static_cast<int>(i), masses[i], params_from_conditions(c, masses[i], hbar), {}});
        return CompositeSystem(std::move(ps));
    }

    static CompositeSystem from_params(const std::vector<double>& masses, const std::vector<double>& thetas,
                                       const std::vector<double>& etas, double hbar = 1.0) {
        if (thetas.size() != masses.size() || etas.size() != masses.size())
            throw ConfigError("masses, thetas and etas must have the same length");
        std::vector<Particle> ps;
        for (std::size_t i = 0; i < masses.size(); ++i)
            ps.push_back({static_cast<int>(i), masses[i], NCParams{thetas[i], etas[i], hbar, masses[i]}, {}});
        return CompositeSystem(std::move(ps));
    }

    const std::vector<Particle>& particles() const noexcept { return particles_; }
    std::size_t size() const noexcept { return particles_.size(); }
    double total_mass() const noexcept { return total_mass_; }
    double hbar() const noexcept { return particles_.front().params.hbar; }

    /// The (gamma, alpha) every particle satisfies, when there is one
    /// (relative agreement `rel_tol`).
    std::optional<MassConditions> shared_conditions(double rel_tol = 1e-12) const {
        const double g0 = particles_.front().params.theta * particles_.front().mass;
        const double a0 = particles_.front().params.eta / particles_.front().mass;
        auto close = [&](double v, double ref) { return std::abs(v - ref) <= rel_tol * std::max(1.0, std::abs(ref)); };
        for (const auto& p : particles_) {
            if (!close(p.params.theta * p.mass, g0) || !close(p.params.eta / p.mass, a0)) return std::nullopt;
        }
        return MassConditions{g0, a0};
    }

  private:
    std::vector<Particle> particles_;
    double total_mass_ = 0.0;
};

/// Canonical center-of-mass forms: x~ = sum (m_a/M) x(a), p~ = sum p(a).
inline CanonicalBasis com_canonical(const CompositeSystem& sys) {
    CanonicalBasis b;
    const double M = sys.total_mass();
    for (const auto& p : sys.particles()) {
        const double w = p.mass / M;
        b.x1 += LinearForm::var(p.id, Kind::x1, w);
        b.x2 += LinearForm::var(p.id, Kind::x2, w);
        b.p1 += LinearForm::var(p.id, Kind::p1);
        b.p2 += LinearForm::var(p.id, Kind::p2);
    }
    return b;
}

struct EffectiveParams {
    double theta_tilde = 0.0;
    double eta_tilde = 0.0;
};

/// theta~ = sum m_a^2 theta_a / M^2, eta~ = sum eta_a. Sums are accumulated in
/// long double and rounded once.
inline EffectiveParams effective_params(const CompositeSystem& sys) {
    if (sys.size() == 1) {
        const auto& p = sys.particles().front().params;
        return {p.theta, p.eta};
    }
    long double num = 0.0L, eta = 0.0L, M = 0.0L;
    for (const auto& p : sys.particles()) {
        const long double m = p.mass;
        num += m * m * static_cast<long double>(p.params.theta);
        eta += p.params.eta;
        M += m;
    }
    return {static_cast<double>(num / (M * M)), static_cast<double>(eta)};
}

namespace detail {

inline void require_family(const CompositeSystem& sys, Family family) {
    for (const auto& p : sys.particles())
        if (p.family && *p.family != family)
            throw ConfigError("mixed-family system: particle " + std::to_string(p.id) + " is declared " +
                              std::string(family_name(*p.family)) + ", route needs " +
                              std::string(family_name(family)));
}

inline Representation com_from_shape(const CompositeSystem& sys, const Shape& shape, Family family,
                                     std::optional<Branch> b, const EffectiveParams& eff) {
    Representation r = assemble(com_canonical(sys), shape);
    r.family = family;
    r.branch = b;
    r.params = NCParams{eff.theta_tilde, eff.eta_tilde, sys.hbar(), sys.total_mass()};
    if (sys.size() == 1) r.particle_id = sys.particles().front().id;
    return r;
}

inline Representation com_sum(const CompositeSystem& sys, Family family, std::optional<Branch> b) {
    Representation r;
    const double M = sys.total_mass();
    for (const auto& p : sys.particles()) {
        const Representation one = family == Family::simple ? build_simple_rep(p.params, p.id)
                                                            : build_branch_rep(p.params, *b, p.id);
        const double w = p.mass / M;
        r.X1 += w * one.X1;
        r.X2 += w * one.X2;
        r.P1 += one.P1;
        r.P2 += one.P2;
    }
    const auto eff = effective_params(sys);
    r.family = family;
    r.branch = b;
    r.params = NCParams{eff.theta_tilde, eff.eta_tilde, sys.hbar(), M};
    if (sys.size() == 1) r.particle_id = sys.particles().front().id;
    return r;
}

}  // namespace detail

/// Branch representation of (theta~, eta~) over the canonical COM forms,
/// expanded in per-particle variables.
inline Representation com_rep_algebraic(const CompositeSystem& sys, Branch b = Branch::minus) {
    detail::require_family(sys, Family::branch);
    const auto eff = effective_params(sys);
    return detail::com_from_shape(sys, detail::branch_shape(eff.theta_tilde, eff.eta_tilde, b), Family::branch,
                                  b, eff);
}

/// Mass-weighted sum of per-particle branch representations (uniform branch).
inline Representation com_rep_direct(const CompositeSystem& sys, Branch b = Branch::minus) {
    detail::require_family(sys, Family::branch);
    return detail::com_sum(sys, Family::branch, b);
}

inline Representation com_simple_algebraic(const CompositeSystem& sys) {
    detail::require_family(sys, Family::simple);
    const auto eff = effective_params(sys);
    return detail::com_from_shape(sys, {1.0, eff.theta_tilde / 2.0, eff.eta_tilde / 2.0}, Family::simple,
                                  std::nullopt, eff);
}

inline Representation com_simple_direct(const CompositeSystem& sys) {
    detail::require_family(sys, Family::simple);
    return detail::com_sum(sys, Family::simple, std::nullopt);
}

/// COM representation written with theta~ = gamma/M and eta~ = alpha*M.
inline Representation com_conditions_form(const CompositeSystem& sys, const MassConditions& c, Family family,
                                          Branch b = Branch::minus) {
    const double M = sys.total_mass();
    const EffectiveParams eff{c.gamma / M, c.alpha * M};
    if (family == Family::simple)
        return detail::com_from_shape(sys, {1.0, c.gamma / (2.0 * M), c.alpha * M / 2.0}, family, std::nullopt,
                                      eff);
    return detail::com_from_shape(sys, detail::branch_shape(eff.theta_tilde, eff.eta_tilde, b), family, b, eff);
}

/// Coefficient of x~2 in P~1 (algebraic route) divided by M. Under shared
/// mass conditions it depends only on (gamma, alpha, branch).
inline double momentum_coefficient_per_mass(const CompositeSystem& sys, Family family, Branch b = Branch::minus) {
    const Representation r = family == Family::simple ? com_simple_algebraic(sys) : com_rep_algebraic(sys, b);
    double c = 0.0;
    for (const auto& p : sys.particles()) c += r.P1.coefficient(p.id, Kind::x2);
    return c / sys.total_mass();
}

struct ComparisonReport {
    Family family = Family::branch;
    std::optional<Branch> branch;
    double total_mass = 0.0;
    EffectiveParams effective;
    /// Per-form coefficient distance between the direct and algebraic routes.
    std::array<double, 4> distances{};
    double max_distance = 0.0;
    bool equal = false;
    double tol = kDefaultTol;
    std::optional<MassConditions> shared_conditions;
    double momentum_coefficient_per_mass = 0.0;
    /// Set under shared conditions: doubling every mass doubles the x~-part of P~.
    std::optional<bool> momentum_proportional_to_mass;
    /// Set under shared conditions: larger distance of either route to the
    /// (gamma/M, alpha*M) form.
    std::optional<double> conditions_form_distance;
};

namespace detail {

inline ComparisonReport compare_routes(const CompositeSystem& sys, Family family, Branch b, double tol) {
    if (!(tol >= 0.0)) throw DomainError("tolerance must be non-negative");
    const bool simple = family == Family::simple;
    const Representation direct = simple ? com_simple_direct(sys) : com_rep_direct(sys, b);
    const Representation algebraic = simple ? com_simple_algebraic(sys) : com_rep_algebraic(sys, b);

    ComparisonReport out;
    out.family = family;
    if (!simple) out.branch = b;
    out.total_mass = sys.total_mass();
    out.effective = effective_params(sys);
    out.tol = tol;
    const auto fd = direct.forms();
    const auto fa = algebraic.forms();
    for (std::size_t i = 0; i < 4; ++i) {
        out.distances[i] = form_distance(*fd[i], *fa[i]);
        out.max_distance = std::max(out.max_distance, out.distances[i]);
    }
    out.equal = out.max_distance <= tol;
    out.shared_conditions = sys.shared_conditions();
    out.momentum_coefficient_per_mass = momentum_coefficient_per_mass(sys, family, b);

    if (out.shared_conditions) {
        const auto c = *out.shared_conditions;
        const Representation target = com_conditions_form(sys, c, family, b);
        out.conditions_form_distance = std::max(rep_distance(direct, target), rep_distance(algebraic, target));

        std::vector<double> doubled;
        for (const auto& p : sys.particles()) doubled.push_back(2.0 * p.mass);
        const auto sys2 = CompositeSystem::from_conditions(c, doubled, sys.hbar());
        const double v2 = momentum_coefficient_per_mass(sys2, family, b);
        const double v1 = out.momentum_coefficient_per_mass;
        out.momentum_proportional_to_mass = std::abs(v2 - v1) <= tol * std::max(1.0, std::abs(v1));
    }
    return out;
}

}  // namespace detail

inline ComparisonReport compare_com_reps(const CompositeSystem& sys, Branch b = Branch::minus,
                                         double tol = kDefaultTol) {
    return detail::compare_routes(sys, Family::branch, b, tol);
}

inline ComparisonReport compare_com_simple(const CompositeSystem& sys, double tol = kDefaultTol) {
    return detail::compare_routes(sys, Family::simple, Branch::minus, tol);
}

}  // namespace ncps
