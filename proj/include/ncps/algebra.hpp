#pragma once

// Linear forms over canonical phase-space variables and the commutator
// induced by the canonical pairing [x_i, p_j] = i hbar delta_ij.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include "ncps/errors.hpp"

namespace ncps {

enum class Kind : std::uint8_t { x1, x2, p1, p2 };

inline constexpr Kind kAllKinds[] = {Kind::x1, Kind::x2, Kind::p1, Kind::p2};

constexpr bool is_position(Kind k) noexcept { return k == Kind::x1 || k == Kind::x2; }

/// Spatial component index, 0 or 1.
constexpr int component(Kind k) noexcept { return (k == Kind::x1 || k == Kind::p1) ? 0 : 1; }

constexpr Kind position_kind(int i) noexcept { return i == 0 ? Kind::x1 : Kind::x2; }
constexpr Kind momentum_kind(int i) noexcept { return i == 0 ? Kind::p1 : Kind::p2; }

constexpr std::string_view kind_name(Kind k) noexcept {
    switch (k) {
        case Kind::x1: return "x1";
        case Kind::x2: return "x2";
        case Kind::p1: return "p1";
        case Kind::p2: return "p2";
    }
    return "?";
}

struct CanonicalVar {
    int particle = 0;
    Kind kind = Kind::x1;

    friend constexpr auto operator<=>(const CanonicalVar&, const CanonicalVar&) = default;
};

inline std::string var_name(const CanonicalVar& v) {
    return std::string(kind_name(v.kind)) + "[" + std::to_string(v.particle) + "]";
}

/// constant + sum of coefficient * canonical variable. Exact zeros are never
/// stored, so two forms with the same value have the same term set.
class LinearForm {
  public:
    using Terms = std::map<CanonicalVar, double>;

    LinearForm() = default;

    static LinearForm var(int particle, Kind kind, double coeff = 1.0) {
        LinearForm f;
        f.set(CanonicalVar{particle, kind}, coeff);
        return f;
    }
    static LinearForm var(CanonicalVar v, double coeff = 1.0) { return var(v.particle, v.kind, coeff); }

    static LinearForm of_constant(double c) {
        LinearForm f;
        f.constant_ = c;
        return f;
    }

    const Terms& terms() const noexcept { return terms_; }
    double constant() const noexcept { return constant_; }

    double coefficient(CanonicalVar v) const {
        auto it = terms_.find(v);
        return it == terms_.end() ? 0.0 : it->second;
    }
    double coefficient(int particle, Kind kind) const { return coefficient(CanonicalVar{particle, kind}); }

    bool is_constant() const noexcept { return terms_.empty(); }

    /// Particle indices referenced by any term.
    std::set<int> particles() const {
        std::set<int> out;
        for (const auto& [v, c] : terms_) out.insert(v.particle);
        return out;
    }

    LinearForm& operator+=(const LinearForm& o) {
        for (const auto& [v, c] : o.terms_) set(v, coefficient(v) + c);
        constant_ += o.constant_;
        return *this;
    }
    LinearForm& operator-=(const LinearForm& o) {
        for (const auto& [v, c] : o.terms_) set(v, coefficient(v) - c);
        constant_ -= o.constant_;
        return *this;
    }
    LinearForm& operator*=(double s) {
        for (auto it = terms_.begin(); it != terms_.end();) {
            it->second *= s;
            it = (it->second == 0.0) ? terms_.erase(it) : std::next(it);
        }
        constant_ *= s;
        return *this;
    }

    friend LinearForm operator+(LinearForm a, const LinearForm& b) { return a += b; }
    friend LinearForm operator-(LinearForm a, const LinearForm& b) { return a -= b; }
    friend LinearForm operator*(LinearForm a, double s) { return a *= s; }
    friend LinearForm operator*(double s, LinearForm a) { return a *= s; }
    friend LinearForm operator-(LinearForm a) { return a *= -1.0; }

    /// Replace every canonical variable v by `image(v)` (a LinearForm).
    template <class Fn>
    LinearForm substitute(Fn&& image) const {
        LinearForm out = of_constant(constant_);
        for (const auto& [v, c] : terms_) out += c * image(v);
        return out;
    }

    std::string str() const {
        std::ostringstream os;
        os.precision(17);
        bool first = true;
        for (const auto& [v, c] : terms_) {
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            os << std::abs(c) << "*" << var_name(v);
            first = false;
        }
        if (constant_ != 0.0 || first) {
            if (!first) os << (constant_ < 0 ? " - " : " + ") << std::abs(constant_);
            else os << constant_;
        }
        return os.str();
    }

  private:
    void set(CanonicalVar v, double c) {
        if (c == 0.0) terms_.erase(v);
        else terms_[v] = c;
    }

    Terms terms_;
    double constant_ = 0.0;
};

/// [A, B] = i * hbar * scalar.
struct CommutatorResult {
    double scalar = 0.0;
    double hbar = 1.0;

    double value_over_i() const noexcept { return hbar * scalar; }
};

/// Commutator of two linear forms. The per-(particle, component) terms
/// a_x b_p - a_p b_x are summed in key order, which makes
/// commutator(a, b).scalar == -commutator(b, a).scalar bit for bit.
inline CommutatorResult commutator(const LinearForm& a, const LinearForm& b, double hbar = 1.0) {
    if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
    std::set<std::pair<int, int>> slots;
    for (const auto* f : {&a, &b})
        for (const auto& [v, c] : f->terms()) slots.emplace(v.particle, component(v.kind));

    double sum = 0.0;
    for (const auto& [particle, i] : slots) {
        const CanonicalVar x{particle, position_kind(i)};
        const CanonicalVar p{particle, momentum_kind(i)};
        sum += a.coefficient(x) * b.coefficient(p) - a.coefficient(p) * b.coefficient(x);
    }
    return CommutatorResult{sum, hbar};
}

/// Largest absolute difference over the constant and all coefficients.
inline double form_distance(const LinearForm& a, const LinearForm& b) {
    double d = std::abs(a.constant() - b.constant());
    for (const auto& [v, c] : a.terms()) d = std::max(d, std::abs(c - b.coefficient(v)));
    for (const auto& [v, c] : b.terms())
        if (!a.terms().contains(v)) d = std::max(d, std::abs(c));
    return d;
}

inline bool form_equal(const LinearForm& a, const LinearForm& b, double tol) {
    if (tol < 0.0) throw DomainError("tolerance must be non-negative");
    return form_distance(a, b) <= tol;
}

}  // namespace ncps
