#pragma once

#include <gtspec/profile.hpp>
#include <gtspec/spectrum.hpp>
#include <gtspec/transfer.hpp>

#include <array>
#include <vector>

namespace gtspec {

// Wronskian constants of a first-order eigenvalue perturbation sigma -> sigma + eps*eta.
// (rho1, j1) is the eigenfunction grown from the kernel vector v1 of M(sigma, lambda);
// v2 = (-conj(j0), conj(rho0)) completes v1 to an orthonormal basis.
struct WronskianConstants {
    cdouble c; // int_0^{2pi} (j1^2 - rho1^2) dy
    cdouble d; // int_0^{2pi} j1^2 eta dy
    std::array<cdouble, 2> v1;
    std::array<cdouble, 2> v2;
};

// Integrals by composite Gauss-Legendre of order 8 with n_quad panels per cell
// (0 picks a |lambda|-scaled count).  Throws degeneracy_error when |c| < 1e-10,
// i.e. when lambda is not behaving like a simple eigenvalue.
WronskianConstants wronskian_constants(const SigmaProfile& sigma, cdouble lambda,
                                       const SigmaDirection& eta, int n_quad = 0);

// First-order response -d/c, so that lambda(eps) = lambda - (d/c) eps + O(eps^2).
cdouble eigen_derivative(const SigmaProfile& sigma, cdouble lambda, const SigmaDirection& eta,
                         int n_quad = 0);

// Component k is the first-order change of Re(lambda) per unit increase of sigma
// on the k-th of K equal cells.  At a benign two-dimensional kernel the result is
// averaged over the kernel basis, which restores translation equivariance; a
// defective eigenvalue (|c| ~ 0) raises degeneracy_error.
std::vector<double> gap_gradient(const SigmaProfile& sigma, cdouble lambda, int K,
                                 int n_quad = 0);

// M(sigma, lambda0 + dlambda) expressed in the orthonormal basis (v1, v2):
// entry (i, j) = <M v_j, v_i>.  At dlambda = 0 the first column vanishes and
// <M v2, v2> = 0; for a simple eigenvalue the (2,1) entry grows linearly with
// slope -c.
Mat2c tilde_m_entries(const SigmaProfile& sigma, cdouble lambda0, cdouble dlambda);

// Order-fit of tilde_m_entries at dlambda and dlambda/2.
struct SimpleCheck {
    bool consistent;    // (2,1) entry scales linearly as a simple eigenvalue demands
    cdouble c_fit;      // Richardson estimate of the (2,1) linear coefficient (= -c)
    cdouble b_fit;      // (1,2) entry at the smaller step (the Lemma's constant b)
    double ratio21;     // |T21(d)| / |T21(d/2)|, -> 2 for a simple eigenvalue
    double ratio11;     // |T11(d)| / |T11(d/2)|
};
SimpleCheck simple_eigenvalue_check(const SigmaProfile& sigma, cdouble lambda0,
                                    double dlambda = 1e-4);

} // namespace gtspec
