#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ncps {

/// Base of every error raised by the engine. `kind()` is the stable name
/// printed by the CLI ("DomainError: ...").
class Error : public std::runtime_error {
  public:
    Error(std::string_view kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    std::string_view kind() const noexcept { return kind_; }

    std::string describe() const { return std::string(kind_) + ": " + what(); }

  private:
    std::string_view kind_;
};

/// A parameter lies outside the real domain of a formula.
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error("DomainError", what) {}
};

/// A formula is singular at this point (plus branch with theta or eta = 0).
struct DegenerateError : Error {
    explicit DegenerateError(const std::string& what) : Error("DegenerateError", what) {}
};

/// Invalid or inconsistent configuration.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

struct StepError : Error {
    explicit StepError(const std::string& what) : Error("StepError", what) {}
};

/// The map from observable initial data to a canonical state is not invertible.
struct SingularMapError : Error {
    explicit SingularMapError(const std::string& what) : Error("SingularMapError", what) {}
};

}  // namespace ncps
