#pragma once

#include <gtspec/profile.hpp>
#include <gtspec/transfer.hpp>

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace gtspec {

// Axis-aligned closed rectangle in the spectral plane.
struct Box {
    double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;

    double width() const { return re_hi - re_lo; }
    double height() const { return im_hi - im_lo; }
    double diameter() const;
    cdouble center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
    bool contains(cdouble z, double slack = 0.0) const;
    Box dilated(double margin) const;
};

struct EigenvalueRecord {
    cdouble lambda{0.0};
    int multiplicity = 1;   // winding count of det M around the cluster
    int kernel_dim = 0;     // geometric multiplicity, 0 when not computed
    double residual = 0.0;  // |det M(lambda)|
    bool converged = true;
};

// Zeros of the requested tolerance shared by the refinement routines.
inline constexpr double default_root_tol = 1e-11;
inline constexpr double min_cluster_diameter = 1e-3;
inline constexpr double boundary_zero_threshold = 1e-9;
inline constexpr double boundary_dilation = 1e-6;
inline constexpr int boundary_retries = 5;

// Number of zeros of det M inside rect, counted with multiplicity, by the
// winding number of det M around the boundary.  A zero too close to the
// boundary triggers an outward dilation and a retry.
int count_zeros(const SigmaProfile& sigma, const Box& rect);

// All zero clusters of det M in rect.  Boxes are split (with jittered split
// lines when a zero sits on a candidate line) until a cluster is isolated or
// the box diameter falls below min_cluster_diameter; clusters are then located
// by a contour moment integral and polished by Newton on det M.
std::vector<EigenvalueRecord> find_eigenvalues(const SigmaProfile& sigma, const Box& rect,
                                               double tol = default_root_tol);

// Closed-form spectrum of the constant profile:
// the two roots of lambda^2 + value*lambda + n^2 for n = 1..n_max, plus -value.
// (Each n >= 1 root carries two modes; positions are listed once.)
std::vector<cdouble> constant_sigma_spectrum(double value, int n_max);

struct GapResult {
    double gap = 0.0;
    std::vector<EigenvalueRecord> leading; // max-Re records, conjugates included
    std::vector<EigenvalueRecord> inside;  // every certified record in search_box
    double accumulation_line = 0.0;        // -l1/(4pi)
    Box search_box;
    bool at_accumulation_line = false;     // no zero strictly right of the line
    std::string note;
};

// Decay rate of the slowest non-conserved mode: searches the strip between the
// accumulation line and 0, discarding the conserved lambda = 0 direction.
// When nothing lies strictly right of the line the gap equals l1/(4pi) and the
// leading field holds the lowest-|Im| cluster found on the line itself.
GapResult spectral_gap(const SigmaProfile& sigma, double im_cutoff = 0.0,
                       double tol = default_root_tol);

// Reasonable search height when the caller does not give one.
double default_im_cutoff(const SigmaProfile& sigma);

// All records within cluster_tol of the maximal real part.
std::vector<EigenvalueRecord> leading_cluster(const SigmaProfile& sigma,
                                              double cluster_tol = 1e-6,
                                              double im_cutoff = 0.0);

// Kernel of M(sigma, lambda) from the singular value decomposition.
struct KernelInfo {
    int dim = 0;                            // numerically zero singular directions
    std::array<cdouble, 2> vec{};           // (rho0, j0), unit norm, smallest direction
    std::array<cdouble, 2> second{};        // second direction when dim == 2
    double s_small = 0.0, s_large = 0.0;    // singular values of M
};
KernelInfo kernel_info(const SigmaProfile& sigma, cdouble lambda);

// True when lambda ~ 0 and the kernel is only the conserved direction (1, 0).
bool is_mass_mode(const SigmaProfile& sigma, const EigenvalueRecord& rec);

// Eigenfunction samples on a uniform grid, propagated from the kernel vector.
struct Eigenfunction {
    std::vector<double> x;
    std::vector<cdouble> rho, j;
    KernelInfo kernel;
    double periodicity_residual = 0.0; // ||S(0->2pi) v - v||_2
};
Eigenfunction eigenvector(const SigmaProfile& sigma, cdouble lambda, int n_grid = 256);

// First eigenvalue with |Re lambda - line| <= eps, scanning upward in Im
// through unit strips until im_max.  Certifies the accumulation behaviour.
EigenvalueRecord find_near_line_eigenvalue(const SigmaProfile& sigma, double eps = 0.05,
                                           double im_max = 100.0);

// CSV rows "re,im,multiplicity,residual", sorted by (re, im).
void write_spectrum_csv(std::ostream& out, std::vector<EigenvalueRecord> records);

} // namespace gtspec
