#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gtspec/profile.hpp"
#include "gtspec/spectrum.hpp"

namespace gtspec {

enum class StopReason { gradient_small, degenerate_leading_cluster, max_iters };

std::string to_string(StopReason reason);

struct OptIterate {
    SigmaProfile sigma;
    double gap = 0.0;
    int cluster_size = 0; // total multiplicity of the leading cluster
};

struct OptResult {
    std::vector<OptIterate> trajectory; // includes the initial point
    SigmaProfile final;
    bool converged = false;
    StopReason stop_reason = StopReason::max_iters;
};

struct OptOptions {
    double cluster_tol = 1e-6;  // leading-cluster window for reporting/subgradients
    double grad_tol = 1e-8;     // stop when the min-norm subgradient is below this
    double alpha0 = 0.5;        // initial line-search step
    double armijo_c = 1e-4;     // sufficient-increase constant
    int max_backtracks = 40;
    double im_cutoff = 0.0;     // 0 = per-profile default
};

// Projected subgradient ascent sigma <- max(0, sigma + alpha*d) on the
// spectral gap over nonnegative K-cell profiles.  d is the normalized
// minimum-norm element of the convex hull of the per-member gradients of the
// leading cluster; alpha by Armijo backtracking on the true gap.  Stops when
// the subgradient is small, when the leading eigenvalue is defective (the
// expected terminal state at an optimum), or after max_iters steps.
// A non-uniform initial profile is resampled onto K uniform cells.
OptResult optimize_gap(const SigmaProfile& initial, int K, int max_iters,
                       const OptOptions& opts = {});

// Minimum-norm point of the convex hull of the given vectors (all the same
// dimension).  Exposed for testing.
std::vector<double> min_norm_hull_point(const std::vector<std::vector<double>>& vectors);

struct GapCurvePoint {
    double sigma = 0.0;
    double gap = 0.0;
};

// Closed-form gap of the constant profile, sigma/2 below the crossing at 2 and
// sigma/2 - sqrt(sigma^2/4 - 1) above, tabulated over [sigma_min, sigma_max]
// and cross-checked against the spectral solver at five sample points.
std::vector<GapCurvePoint> gap_curve_constant(double sigma_min, double sigma_max, int steps);

// Closed-form constant-profile gap at a single value.
double constant_gap(double sigma_value);

// CSV rows "iter,gap,cluster_size,sigma_0,...,sigma_{K-1}".
void write_trajectory_csv(std::ostream& out, const OptResult& result);

// CSV rows "sigma,gap".
void write_gap_curve_csv(std::ostream& out, const std::vector<GapCurvePoint>& curve);

} // namespace gtspec
