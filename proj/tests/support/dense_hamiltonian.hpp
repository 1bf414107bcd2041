#pragma once

// Dense eigensolver oracle for the periodic finite-difference Hamiltonian,
// backed by Eigen's symmetric solver.  Kept in its own header so only the
// tests that need it pull in Eigen.

#include <gtspec/profile.hpp>

#include <Eigen/Dense>

#include <vector>

namespace oracles {

// k smallest eigenvalues of the n-cell discretization of
// -d^2/dx^2 + lambda*(lambda + sigma(x)) with periodic wrap; sigma sampled at
// cell midpoints exactly as the library's solver does.
inline std::vector<double> dense_hamiltonian_eigs(const gtspec::SigmaProfile& sigma,
                                                  double lambda, int k, int n) {
    double dx = gtspec::two_pi / n;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double x = (i + 0.5) * dx;
        a(i, i) = 2.0 / (dx * dx) + lambda * (lambda + sigma.eval(x));
        a(i, (i + 1) % n) -= 1.0 / (dx * dx);
        a(i, (i + n - 1) % n) -= 1.0 / (dx * dx);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    std::vector<double> out(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) out[static_cast<size_t>(i)] = solver.eigenvalues()(i);
    return out;
}

} // namespace oracles
