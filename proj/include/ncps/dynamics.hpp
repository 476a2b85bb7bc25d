#pragma once

// Classical evolution of quadratic Hamiltonians written through a
// representation: H = (P1^2 + P2^2)/2m + V(X). Hamilton's equations
// z' = J grad H are linear in the canonical state z, so every step is an
// exact propagator exp(A dt) of the affine system.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ncps/algebra.hpp"
#include "ncps/errors.hpp"
#include "ncps/representation.hpp"

namespace ncps {

enum class PotentialKind { free, uniform_gravity, harmonic };

struct Potential {
    PotentialKind kind = PotentialKind::free;
    double g = 0.0;
    double omega = 0.0;

    static Potential free() { return {}; }
    static Potential gravity(double g) { return {PotentialKind::uniform_gravity, g, 0.0}; }
    static Potential harmonic(double omega) { return {PotentialKind::harmonic, 0.0, omega}; }
};

constexpr std::string_view potential_name(PotentialKind k) noexcept {
    switch (k) {
        case PotentialKind::free: return "free";
        case PotentialKind::uniform_gravity: return "gravity";
        case PotentialKind::harmonic: return "harmonic";
    }
    return "?";
}

/// H(z) = 1/2 z^T S z + l^T z + c over an ordered canonical basis.
struct QuadraticHamiltonian {
    Potential potential;
    Representation rep;
    std::vector<CanonicalVar> basis;
    Eigen::MatrixXd hessian;
    Eigen::VectorXd linear;
    double constant = 0.0;

    Eigen::Index dim() const { return static_cast<Eigen::Index>(basis.size()); }

    Eigen::Index index_of(CanonicalVar v) const {
        for (std::size_t i = 0; i < basis.size(); ++i)
            if (basis[i] == v) return static_cast<Eigen::Index>(i);
        throw ConfigError("variable " + var_name(v) + " is not in the Hamiltonian basis");
    }

    /// Coefficient vector of a form over this basis (its constant is returned separately).
    std::pair<Eigen::VectorXd, double> vectorize(const LinearForm& f) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim());
        for (const auto& [var, c] : f.terms()) v(index_of(var)) = c;
        return {v, f.constant()};
    }

    double energy(const Eigen::VectorXd& z) const { return 0.5 * z.dot(hessian * z) + linear.dot(z) + constant; }

    /// Canonical symplectic matrix: x' = dH/dp, p' = -dH/dx.
    Eigen::MatrixXd symplectic() const {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim(), dim());
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if (!is_position(basis[i].kind)) continue;
            const Eigen::Index x = static_cast<Eigen::Index>(i);
            const Eigen::Index p = index_of({basis[i].particle, momentum_kind(component(basis[i].kind))});
            J(x, p) = 1.0;
            J(p, x) = -1.0;
        }
        return J;
    }

    /// Time derivative {f, H} of a linear observable, itself a linear form.
    LinearForm velocity(const LinearForm& f) const {
        const auto [v, c] = vectorize(f);
        const Eigen::RowVectorXd row = v.transpose() * symplectic();
        const Eigen::RowVectorXd coeffs = row * hessian;
        LinearForm out = LinearForm::of_constant(row.dot(linear));
        for (Eigen::Index i = 0; i < dim(); ++i)
            if (coeffs(i) != 0.0) out += LinearForm::var(basis[static_cast<std::size_t>(i)], coeffs(i));
        return out;
    }
};

namespace detail {

inline double evaluate(const LinearForm& f, const QuadraticHamiltonian& h, const Eigen::VectorXd& z) {
    const auto [v, c] = h.vectorize(f);
    return v.dot(z) + c;
}

}  // namespace detail

inline QuadraticHamiltonian build_hamiltonian(const Potential& potential, const Representation& rep) {
    rep.params.validate();
    QuadraticHamiltonian h;
    h.potential = potential;
    h.rep = rep;
    std::set<int> particles;
    for (const auto* f : rep.forms())
        for (int id : f->particles()) particles.insert(id);
    if (rep.particle_id) particles.insert(*rep.particle_id);
    for (int id : particles)
        for (Kind k : kAllKinds) h.basis.push_back({id, k});

    h.hessian = Eigen::MatrixXd::Zero(h.dim(), h.dim());
    h.linear = Eigen::VectorXd::Zero(h.dim());

    // w (v.z + c)^2 adds 2w v v^T to S, 2wc v to l, w c^2 to the constant.
    auto add_square = [&](double w, const LinearForm& f) {
        const auto [v, c] = h.vectorize(f);
        h.hessian += 2.0 * w * v * v.transpose();
        h.linear += 2.0 * w * c * v;
        h.constant += w * c * c;
    };
    const double m = rep.params.mass;
    add_square(0.5 / m, rep.P1);
    add_square(0.5 / m, rep.P2);
    switch (potential.kind) {
        case PotentialKind::free: break;
        case PotentialKind::uniform_gravity: {
            const auto [v, c] = h.vectorize(rep.X2);
            h.linear += m * potential.g * v;
            h.constant += m * potential.g * c;
            break;
        }
        case PotentialKind::harmonic: {
            const double w = 0.5 * m * potential.omega * potential.omega;
            add_square(w, rep.X1);
            add_square(w, rep.X2);
            break;
        }
    }
    return h;
}

struct Trajectory {
    std::vector<CanonicalVar> basis;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> canonical_states;
    /// (X1, X2, P1, P2) evaluated at each canonical state.
    std::vector<std::array<double, 4>> nc_observables;
    std::vector<double> energies;

    std::size_t size() const noexcept { return times.size(); }

    /// max |H(t) - H(0)| / |H(0)|, or the absolute drift when H(0) = 0.
    double energy_drift() const {
        if (energies.empty()) return 0.0;
        double d = 0.0;
        for (double e : energies) d = std::max(d, std::abs(e - energies.front()));
        const double h0 = std::abs(energies.front());
        return h0 > 0.0 ? d / h0 : d;
    }
};

/// Integrates z' = J (S z + l) from `initial` to `t_end` with exact steps of
/// length dt; the final step is shortened to land on t_end. The propagator and
/// the running state are kept in long double; energies and observables are
/// evaluated from that state before it is rounded for storage.
inline Trajectory evolve(const QuadraticHamiltonian& h, const Eigen::VectorXd& initial, double t_end, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw StepError("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw StepError("t_end must be non-negative");
    if (initial.size() != h.dim()) throw ConfigError("initial state has the wrong dimension");

    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const Eigen::Index n = h.dim();
    const MatL J = h.symplectic().cast<long double>();
    const MatL S = h.hessian.cast<long double>();
    const VecL l = h.linear.cast<long double>();
    MatL gen = MatL::Zero(n + 1, n + 1);
    gen.topLeftCorner(n, n) = J * S;
    gen.topRightCorner(n, 1) = J * l;
    auto propagator = [&](double step) -> MatL { return (gen * static_cast<long double>(step)).exp(); };

    const auto steps = static_cast<std::size_t>(std::max(0.0, std::ceil(t_end / dt - 1e-9)));
    const MatL full = propagator(dt);

    Trajectory traj;
    traj.basis = h.basis;
    std::array<VecL, 4> obs;
    std::array<long double, 4> obs_c{};
    const auto forms = h.rep.forms();
    for (std::size_t i = 0; i < 4; ++i) {
        const auto [v, c] = h.vectorize(*forms[i]);
        obs[i] = v.cast<long double>();
        obs_c[i] = c;
    }
    VecL aug(n + 1);
    aug.head(n) = initial.cast<long double>();
    aug(n) = 1.0L;
    auto record = [&](double t) {
        const VecL z = aug.head(n);
        traj.times.push_back(t);
        traj.canonical_states.push_back(z.cast<double>());
        std::array<double, 4> o{};
        for (std::size_t i = 0; i < 4; ++i) o[i] = static_cast<double>(obs[i].dot(z) + obs_c[i]);
        traj.nc_observables.push_back(o);
        traj.energies.push_back(static_cast<double>(0.5L * z.dot(S * z) + l.dot(z) + h.constant));
    };
    record(0.0);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = k == steps ? t_end : static_cast<double>(k) * dt;
        const double step = t - traj.times.back();
        aug = (std::abs(step - dt) <= 1e-12 * dt ? full : propagator(step)) * aug;
        record(t);
    }
    return traj;
}

/// Observable initial data (X1, X2, dX1/dt, dX2/dt).
struct ObservableState {
    double X1 = 0.0;
    double X2 = 0.0;
    double V1 = 0.0;
    double V2 = 0.0;
};

/// Canonical state reproducing the observable initial data under `h`.
inline Eigen::VectorXd canonical_from_observables(const QuadraticHamiltonian& h, const ObservableState& s) {
    if (h.dim() != 4) throw ConfigError("observable initial data needs a single-particle Hamiltonian");
    const std::array<LinearForm, 4> rows{h.rep.X1, h.rep.X2, h.velocity(h.rep.X1), h.velocity(h.rep.X2)};
    const std::array<double, 4> target{s.X1, s.X2, s.V1, s.V2};
    Eigen::Matrix4d B;
    Eigen::Vector4d rhs;
    for (int i = 0; i < 4; ++i) {
        const auto [v, c] = h.vectorize(rows[static_cast<std::size_t>(i)]);
        B.row(i) = v.transpose();
        rhs(i) = target[static_cast<std::size_t>(i)] - c;
    }
    Eigen::FullPivLU<Eigen::Matrix4d> lu(B);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible())
        throw SingularMapError("(X, dX/dt) -> canonical state map is singular for these parameters");
    return lu.solve(rhs);
}

struct WepScenario {
    Potential potential = Potential::gravity(1.0);
    ObservableState initial{0.0, 0.0, 1.0, 1.0};
    double t_end = 10.0;
    double dt = 0.01;
};

struct WepResult {
    double deviation_max = 0.0;
    /// Worst relative energy drift over both trajectories.
    double energy_drift = 0.0;
    std::array<Trajectory, 2> trajectories;
};

/// Largest distance between the (X1, X2) curves of two bodies released from
/// the same observable initial data.
inline WepResult wep_deviation(const std::array<NCParams, 2>& bodies, Family family, Branch b,
                               const WepScenario& scenario) {
    WepResult out;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto h = build_hamiltonian(scenario.potential, build_rep(bodies[i], family, b, 0));
        const Eigen::VectorXd z0 = canonical_from_observables(h, scenario.initial);
        out.trajectories[i] = evolve(h, z0, scenario.t_end, scenario.dt);
        out.energy_drift = std::max(out.energy_drift, out.trajectories[i].energy_drift());
    }
    const auto& a = out.trajectories[0].nc_observables;
    const auto& c = out.trajectories[1].nc_observables;
    for (std::size_t k = 0; k < a.size(); ++k)
        out.deviation_max = std::max(out.deviation_max, std::hypot(a[k][0] - c[k][0], a[k][1] - c[k][1]));
    return out;
}

inline WepResult wep_deviation(const MassConditions& c, std::array<double, 2> masses, Family family, Branch b,
                               const WepScenario& scenario, double hbar = 1.0) {
    return wep_deviation({params_from_conditions(c, masses[0], hbar), params_from_conditions(c, masses[1], hbar)},
                         family, b, scenario);
}

}  // namespace ncps
