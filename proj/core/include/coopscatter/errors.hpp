#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace coop {

// Argument outside the mathematical domain of a function (x <= 0 for y_n, |u| > 1, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Minimum-separation rejection sampling ran out of retries for one atom.
class PackingInfeasible : public std::runtime_error {
public:
    PackingInfeasible(std::size_t atom, std::size_t attempts)
        : std::runtime_error("packing infeasible: atom " + std::to_string(atom) + " rejected " +
                             std::to_string(attempts) + " times"),
          atom_(atom), attempts_(attempts) {}

    std::size_t atom() const noexcept { return atom_; }
    std::size_t attempts() const noexcept { return attempts_; }

private:
    std::size_t atom_;
    std::size_t attempts_;
};

// A dense solve or eigenvector basis is too ill-conditioned to trust.
class IllConditioned : public std::runtime_error {
public:
    IllConditioned(const std::string& what, double condition)
        : std::runtime_error(what + " (condition estimate " + std::to_string(condition) + ")"),
          condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

// Adaptive quadrature stopped before reaching the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error)
        : std::runtime_error(what + " (estimate " + std::to_string(estimate) + ", error " +
                             std::to_string(error) + ")"),
          estimate_(estimate), error_(error) {}

    double estimate() const noexcept { return estimate_; }
    double error() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

// The fallback ODE integrator could not make progress.
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One disorder realization failed inside an average; carries the seed that reproduces it.
class RealizationError : public std::runtime_error {
public:
    RealizationError(std::size_t index, std::uint64_t seed, const std::string& cause)
        : std::runtime_error("realization " + std::to_string(index) + " (seed " +
                             std::to_string(seed) + ") failed: " + cause),
          index_(index), seed_(seed) {}

    std::size_t index() const noexcept { return index_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::size_t index_;
    std::uint64_t seed_;
};

}  // namespace coop
