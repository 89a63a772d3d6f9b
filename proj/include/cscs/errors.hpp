#pragma once

#include <stdexcept>
#include <string>

namespace cscs {

// Input violates a documented domain restriction (negative duration, Q outside (0,1], ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A structured object fails its invariants (non-stochastic alpha, indefinite Q, shape mismatch).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A well-posed request has no solution within its stated bounds (BD null space too
// small, antenna search cap reached, empty interference budget).
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unknown configuration content; message carries the offending key path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cscs
