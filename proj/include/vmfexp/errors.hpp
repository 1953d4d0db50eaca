#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vmfexp {

/// Precondition violation: bad parameter ranges, dimension mismatches, unknown ids.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Tangent extraction was asked for a direction parallel to the pole.
class DegenerateTangentError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Resultant length too close to 1 for the closed-form concentration estimate.
class ConcentrationOverflowError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A point set collapses after centering (all vectors identical).
class DegenerateSetError : public DomainError {
public:
    using DomainError::DomainError;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Randomized search exhausted its budget. `closest` is the best value seen.
class NotFoundError : public std::runtime_error {
public:
    NotFoundError(const std::string& what, double closest)
        : std::runtime_error(what), closest_(closest) {}

    double closest() const noexcept { return closest_; }

private:
    double closest_;
};

}  // namespace vmfexp
