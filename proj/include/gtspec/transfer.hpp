#pragma once

#include <gtspec/profile.hpp>

#include <complex>

namespace gtspec {

using cdouble = std::complex<double>;

// Dense complex 2x2 matrix, row-major named entries.
struct Mat2c {
    cdouble m11{0.0}, m12{0.0}, m21{0.0}, m22{0.0};

    static Mat2c identity() { return {1.0, 0.0, 0.0, 1.0}; }
    cdouble det() const { return m11 * m22 - m12 * m21; }
    double frobenius() const;
    double norm2() const; // spectral norm (largest singular value)
};

Mat2c operator*(const Mat2c& a, const Mat2c& b);
Mat2c operator-(const Mat2c& a, const Mat2c& b);
Mat2c operator+(const Mat2c& a, const Mat2c& b);

// Value and lambda-derivative carried together through products.
struct Mat2cJet {
    Mat2c value;
    Mat2c dlambda;
};

Mat2cJet operator*(const Mat2cJet& a, const Mat2cJet& b);

// Solution operator over a cell of length `length` with constant rate `sigma`
// for the first-order system  (rho, j)' = [[0, -(sigma+lambda)], [-lambda, 0]] (rho, j).
// With z = lambda*(lambda+sigma), C = cosh(L sqrt z), T = sinh(L sqrt z)/sqrt z
// (both entire in z) the matrix is [[C, -(lambda+sigma) T], [-lambda T, C]].
// Unit determinant for every argument.
Mat2c segment_propagator(double sigma, cdouble lambda, double length);
Mat2cJet segment_propagator_jet(double sigma, cdouble lambda, double length);

// Solution operator from x to y, 0 <= x <= y <= 2pi, across the profile's cells.
// Cell products are accumulated in order; above `compensated_cell_threshold`
// cells the accumulation runs in twice-working precision.
Mat2c solve_transfer(const SigmaProfile& sigma, cdouble lambda, double x, double y);

inline constexpr int compensated_cell_threshold = 256;

// Monodromy defect M = Id - S(0 -> 2pi) and its determinant/derivative.
Mat2c m_matrix(const SigmaProfile& sigma, cdouble lambda);
cdouble det_m(const SigmaProfile& sigma, cdouble lambda);
Mat2cJet m_matrix_jet(const SigmaProfile& sigma, cdouble lambda);

struct DetJet {
    cdouble value;
    cdouble dlambda;
};
DetJet det_m_jet(const SigmaProfile& sigma, cdouble lambda);

// Large-|Im lambda| limit of M: with w = 2pi*lambda + l1/2,
// diagonal 1 - cosh(w) and off-diagonal sinh(w).
Mat2c asymptotic_m(double l1, cdouble lambda);

// A priori bound  ||S(x->y)|| <= exp(|Re lambda| (y-x) + l1/2).
double growth_bound(const SigmaProfile& sigma, cdouble lambda, double x, double y);

} // namespace gtspec
