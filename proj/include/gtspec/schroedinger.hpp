#pragma once

#include <gtspec/profile.hpp>

#include <utility>
#include <vector>

namespace gtspec {

// Lowest eigenvalues of the periodic Hamiltonian -d^2/dx^2 + lambda*(lambda + sigma(x))
// on a uniform n_grid-point second-order discretization (sigma sampled at cell
// midpoints).  mu holds the raw grid values; mu_err the signed Richardson term
// from the n_grid/2 companion solve, so mu[i] + mu_err[i] is the improved value
// and |mu_err[i]| an error estimate.
struct HamiltonianSpectrum {
    double lambda = 0.0;
    std::vector<double> mu;
    std::vector<double> mu_err;
    int n_grid = 0;

    double extrapolated(int i) const { return mu[static_cast<size_t>(i)] + mu_err[static_cast<size_t>(i)]; }
};

HamiltonianSpectrum hamiltonian_eigs(const SigmaProfile& sigma, double lambda, int k,
                                     int n_grid = 1024);

// -l1/(4pi) + sqrt((l1/(4pi))^2 - 1); requires l1 > 4pi
double lambda_s(double l1);

// Shift phi in [0, pi) with int sigma(x) cos(2(x - phi)) dx = 0.  When both
// Fourier coefficients vanish (constant sigma) any shift works and 0 is returned.
double phase_shift(const SigmaProfile& sigma);

// int sigma(x) cos(2(x - phi)) dx for a candidate shift (diagnostic)
double phase_shift_residual(const SigmaProfile& sigma, double phi);

// Rayleigh quotients <j, H j> of the test functions j1 = 1 and j2 = sin(x - phi),
// assembled from exact per-cell integrals
std::pair<double, double> rayleigh_quotients(const SigmaProfile& sigma, double lambda);

// Slow decaying eigenvalue: the zero of mu_2(lambda) in [lambda_s, 0), which is a
// real eigenvalue of the kinetic generator.  Cross-checked against det M.
struct SlowEigenvalue {
    double lambda_star = 0.0;
    double mu2 = 0.0;        // extrapolated mu_2 at lambda_star
    double det_m_abs = 0.0;  // |det M(lambda_star)|
    double lambda_s = 0.0;
    int n_grid = 0;
};

SlowEigenvalue find_slow_eigenvalue_certified(const SigmaProfile& sigma, double tol = 1e-6);
double find_slow_eigenvalue(const SigmaProfile& sigma, double tol = 1e-6);

} // namespace gtspec
