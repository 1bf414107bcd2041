#pragma once

// Independent numerical oracles for the test suite.  These deliberately avoid
// the library's own closed-form propagators and eigen-solvers so that a shared
// bug cannot cancel out of a comparison.

#include <gtspec/profile.hpp>
#include <gtspec/transfer.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracles {

using gtspec::cdouble;
using gtspec::Mat2c;
using gtspec::SigmaProfile;

// Classic RK4 on the first-order system (rho, j)' = A(x) (rho, j) with
// A = [[0, -(lambda+sigma(x))], [-lambda, 0]].  Integration is split at the
// profile's breakpoints so the right-hand side is smooth on every step.
inline Mat2c rk4_transfer(const SigmaProfile& sigma, cdouble lambda, double x0, double x1,
                          double h = 1e-4) {
    // sv stays fixed for the whole segment: evaluating at stage points would
    // pick up the next cell's value at the right-continuous breakpoint itself
    auto rhs = [&](double sv, const std::array<cdouble, 2>& y) {
        return std::array<cdouble, 2>{-(lambda + sv) * y[1], -lambda * y[0]};
    };
    auto advance = [&](std::array<cdouble, 2> y, double a, double b, double sv) {
        int steps = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
        double dx = (b - a) / steps;
        for (int i = 0; i < steps; ++i) {
            auto k1 = rhs(sv, y);
            auto k2 = rhs(sv, {y[0] + dx / 2 * k1[0], y[1] + dx / 2 * k1[1]});
            auto k3 = rhs(sv, {y[0] + dx / 2 * k2[0], y[1] + dx / 2 * k2[1]});
            auto k4 = rhs(sv, {y[0] + dx * k3[0], y[1] + dx * k3[1]});
            y[0] += dx / 6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += dx / 6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        }
        return y;
    };
    // segment endpoints: x0, x1 and every breakpoint in between
    std::vector<double> cuts{x0};
    for (double b : sigma.breakpoints)
        if (b > x0 + 1e-15 && b < x1 - 1e-15) cuts.push_back(b);
    cuts.push_back(x1);
    std::sort(cuts.begin(), cuts.end());

    Mat2c out = Mat2c::identity();
    std::array<cdouble, 2> e1{1.0, 0.0}, e2{0.0, 1.0};
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double sv = sigma.eval(0.5 * (cuts[i] + cuts[i + 1]));
        e1 = advance(e1, cuts[i], cuts[i + 1], sv);
        e2 = advance(e2, cuts[i], cuts[i + 1], sv);
    }
    out.m11 = e1[0];
    out.m21 = e1[1];
    out.m12 = e2[0];
    out.m22 = e2[1];
    return out;
}

// Newton on det M from a warm start, using the analytic lambda-jet.
inline cdouble track_root(const SigmaProfile& sigma, cdouble start, double tol = 1e-13) {
    cdouble z = start;
    for (int i = 0; i < 60; ++i) {
        gtspec::DetJet d = gtspec::det_m_jet(sigma, z);
        if (std::abs(d.dlambda) < 1e-14) break;
        cdouble step = d.value / d.dlambda;
        z -= step;
        if (std::abs(step) < tol) return z;
    }
    return z;
}

// Central finite difference of a tracked simple root under sigma -> sigma+eps*eta.
// Throws if either tracked root jumps further than 10*eps from the base point
// (the root is then not following the intended branch).
inline cdouble fd_eigen_derivative(const SigmaProfile& sigma, cdouble lambda0,
                                   const gtspec::SigmaDirection& eta, double eps = 1e-5) {
    cdouble lp = track_root(gtspec::perturb(sigma, eta, eps), lambda0);
    cdouble lm = track_root(gtspec::perturb(sigma, eta, -eps), lambda0);
    if (std::abs(lp - lambda0) > 10 * eps || std::abs(lm - lambda0) > 10 * eps)
        throw std::runtime_error("finite-difference root tracking left the branch");
    return (lp - lm) / (2 * eps);
}

// Uniform random K-cell profile with values in [0, v_max].
inline SigmaProfile random_profile(std::mt19937& rng, int k_max, double v_max) {
    std::uniform_int_distribution<int> kd(1, k_max);
    std::uniform_real_distribution<double> vd(0.0, v_max);
    std::vector<double> vals(static_cast<size_t>(kd(rng)));
    for (auto& v : vals) v = vd(rng);
    return gtspec::sample_uniform(vals);
}

} // namespace oracles
