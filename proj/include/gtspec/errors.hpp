#pragma once

#include <stdexcept>
#include <string>

namespace gtspec {

// Invalid numeric input (negative rate, point outside the torus, bad box, ...).
struct domain_error : std::domain_error {
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// Malformed structured input (profile files, config files).
struct format_error : std::runtime_error {
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

// An iteration failed to reach its tolerance.
struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

// A first-order quantity was requested at a defective (non-differentiable) point.
struct degeneracy_error : std::runtime_error {
    explicit degeneracy_error(const std::string& what) : std::runtime_error(what) {}
};

// A cross-check between two internal routes disagreed; indicates a bug or
// a discretization failure, never bad user input.
struct internal_error : std::logic_error {
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

} // namespace gtspec
