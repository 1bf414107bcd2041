#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gtspec {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Breakpoints coinciding closer than this are merged.
inline constexpr double breakpoint_tol = 1e-12;

// A piecewise-constant function on the torus [0, 2pi).
// breakpoints has K+1 entries 0 = x_0 < x_1 < ... < x_K = 2pi and
// values has K entries; the function equals values[k] on [x_k, x_{k+1}).
// Evaluation is right-continuous and 2pi-periodic.
struct PiecewiseConstant {
    std::vector<double> breakpoints;
    std::vector<double> values;

    int cells() const { return static_cast<int>(values.size()); }
    double eval(double x) const;
    double integral() const; // over one period
};

// A jump-rate profile: a nonnegative piecewise-constant function.
struct SigmaProfile : PiecewiseConstant {
    double l1_norm() const { return integral(); }
    double max_value() const;
};

// A perturbation direction: same representation, any sign.
using SigmaDirection = PiecewiseConstant;

// Validates breakpoints/values and builds a profile.
// Throws domain_error for negative values, format_error for bad breakpoints.
SigmaProfile make_piecewise(const std::vector<double>& breakpoints,
                            const std::vector<double>& values);

// Builds the constant profile sigma(x) = value.
SigmaProfile make_constant(double value);

// Direction with the given breakpoints (no sign restriction).
SigmaDirection make_direction(const std::vector<double>& breakpoints,
                              const std::vector<double>& values);

// Direction that is 1 on cell k of the uniform K-cell grid and 0 elsewhere.
SigmaDirection cell_indicator(int k, int K);

// sigma + eps*eta on the merged breakpoint set.
// Throws domain_error if the result dips below zero anywhere.
SigmaProfile perturb(const SigmaProfile& sigma, const SigmaDirection& eta, double eps);

// Resamples an arbitrary function onto K uniform cells by midpoint values.
SigmaProfile sample_uniform(const std::vector<double>& midpoint_values);

// Merged sorted breakpoint set of two piecewise functions (tolerance merge).
std::vector<double> merge_breakpoints(const std::vector<double>& a,
                                      const std::vector<double>& b);

// File format: one line "x_break value" per cell, a final line "2pi -",
// '#' starts a comment. Round-trips bit-exactly through write/read.
SigmaProfile read_profile(std::istream& in);
SigmaProfile read_profile_file(const std::string& path);
void write_profile(std::ostream& out, const SigmaProfile& sigma);
void write_profile_file(const std::string& path, const SigmaProfile& sigma);

} // namespace gtspec
