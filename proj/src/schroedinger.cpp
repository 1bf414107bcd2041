#include <gtspec/schroedinger.hpp>
#include <gtspec/errors.hpp>
#include <gtspec/transfer.hpp>

#include <algorithm>
#include <cmath>

namespace gtspec {

namespace {

constexpr double pi = 3.14159265358979323846;

// Counts eigenvalues of the periodic tridiagonal matrix below t.  The matrix is
// diag(a) with off-diagonal b on the cyclic neighbors; its inertia is that of
// the leading (n-1) tridiagonal block plus the sign of the 1x1 Schur complement
// of the last row/column (which carries both corner entries).
int negatives_below(const std::vector<double>& a, double b, double t) {
    int n = static_cast<int>(a.size());
    double pivmin = 1e-300;
    int neg = 0;
    double d = a[0] - t;
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0) ++neg;
    // z = L^{-1} u for the bordered column u = (b, 0, ..., 0, b)^T
    double z = b;           // entry 0 of z
    double sum = z * z / d; // accumulates u^T T^{-1} u
    for (int i = 1; i <= n - 2; ++i) {
        double l = b / d;
        d = a[static_cast<size_t>(i)] - t - b * l;
        if (std::abs(d) < pivmin) d = -pivmin;
        if (d < 0) ++neg;
        double zi = -l * z;
        if (i == n - 2) zi += b;
        z = zi;
        sum += z * z / d;
    }
    double schur = a[static_cast<size_t>(n - 1)] - t - sum;
    if (schur < 0) ++neg;
    return neg;
}

// k lowest eigenvalues (ascending, with multiplicity) by inertia bisection
std::vector<double> lowest_eigs(const std::vector<double>& diag, double b, int k) {
    double lo = diag[0], hi = diag[0];
    for (double v : diag) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    lo += 2.0 * b - 1e-9; // b < 0: Gershgorin bounds
    hi += -2.0 * b + 1e-9;
    std::vector<double> out(static_cast<size_t>(k));
    for (int j = 1; j <= k; ++j) {
        double a = lo, c = hi;
        for (int it = 0; it < 200 && c - a > 1e-13 * (1.0 + std::abs(a) + std::abs(c)); ++it) {
            double m = 0.5 * (a + c);
            if (negatives_below(diag, b, m) >= j)
                c = m;
            else
                a = m;
        }
        out[static_cast<size_t>(j - 1)] = 0.5 * (a + c);
        lo = a; // eigenvalues are requested in ascending order
    }
    return out;
}

std::vector<double> grid_eigs(const SigmaProfile& sigma, double lambda, int k, int n) {
    double h = two_pi / n;
    std::vector<double> diag(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = (i + 0.5) * h;
        diag[static_cast<size_t>(i)] = 2.0 / (h * h) + lambda * (lambda + sigma.eval(x));
    }
    return lowest_eigs(diag, -1.0 / (h * h), k);
}

// Fourier coefficients int sigma cos(2x) dx and int sigma sin(2x) dx, per-cell exact
void second_fourier(const SigmaProfile& sigma, double& sc, double& ss) {
    sc = 0.0;
    ss = 0.0;
    for (int c = 0; c < sigma.cells(); ++c) {
        double a = sigma.breakpoints[static_cast<size_t>(c)];
        double b = sigma.breakpoints[static_cast<size_t>(c) + 1];
        double v = sigma.values[static_cast<size_t>(c)];
        sc += v * 0.5 * (std::sin(2.0 * b) - std::sin(2.0 * a));
        ss += v * 0.5 * (std::cos(2.0 * a) - std::cos(2.0 * b));
    }
}

} // namespace

HamiltonianSpectrum hamiltonian_eigs(const SigmaProfile& sigma, double lambda, int k, int n_grid) {
    if (k < 1) throw domain_error("hamiltonian_eigs needs k >= 1");
    if (n_grid < 64) throw domain_error("hamiltonian_eigs needs n_grid >= 64");
    if (k > n_grid) throw domain_error("hamiltonian_eigs: more eigenvalues than grid points");
    HamiltonianSpectrum out;
    out.lambda = lambda;
    out.n_grid = n_grid;
    out.mu = grid_eigs(sigma, lambda, k, n_grid);
    std::vector<double> coarse = grid_eigs(sigma, lambda, std::min(k, n_grid / 2), n_grid / 2);
    out.mu_err.resize(out.mu.size(), 0.0);
    for (size_t i = 0; i < coarse.size(); ++i)
        out.mu_err[i] = (out.mu[i] - coarse[i]) / 3.0;
    return out;
}

double lambda_s(double l1) {
    double r = l1 / (4.0 * pi);
    if (!(r > 1.0)) throw domain_error("lambda_s needs l1 > 4*pi");
    return -r + std::sqrt(r * r - 1.0);
}

double phase_shift(const SigmaProfile& sigma) {
    double sc, ss;
    second_fourier(sigma, sc, ss);
    double scale = 1e-10 * sigma.l1_norm() + 1e-12;
    if (std::abs(sc) < scale && std::abs(ss) < scale) return 0.0; // any shift works
    // cos(2(x-phi)) = cos2x cos2phi + sin2x sin2phi, so the residual
    // sc*cos(2phi) + ss*sin(2phi) vanishes at 2phi = atan2(-sc, ss)
    double phi = 0.5 * std::atan2(-sc, ss);
    if (phi < 0.0) phi += pi;
    if (phi >= pi) phi -= pi;
    if (std::abs(phase_shift_residual(sigma, phi)) > scale)
        throw internal_error("phase shift residual check failed");
    return phi;
}

double phase_shift_residual(const SigmaProfile& sigma, double phi) {
    double sc, ss;
    second_fourier(sigma, sc, ss);
    return sc * std::cos(2.0 * phi) + ss * std::sin(2.0 * phi);
}

std::pair<double, double> rayleigh_quotients(const SigmaProfile& sigma, double lambda) {
    double phi = phase_shift(sigma);
    // j1 = 1:  <j1, H j1> = 2pi lambda^2 + lambda * int sigma
    // j2 = sin(x - phi): every term from exact per-cell primitives
    double q1 = 2.0 * pi * lambda * lambda;
    double grad2 = 0.0; // int cos^2(x-phi)
    double sin2 = 0.0;  // int sin^2(x-phi)
    double ssin2 = 0.0; // int sigma sin^2(x-phi)
    for (int c = 0; c < sigma.cells(); ++c) {
        double a = sigma.breakpoints[static_cast<size_t>(c)];
        double b = sigma.breakpoints[static_cast<size_t>(c) + 1];
        double v = sigma.values[static_cast<size_t>(c)];
        double osc = 0.25 * (std::sin(2.0 * (b - phi)) - std::sin(2.0 * (a - phi)));
        q1 += lambda * v * (b - a);
        grad2 += 0.5 * (b - a) + osc;
        sin2 += 0.5 * (b - a) - osc;
        ssin2 += v * (0.5 * (b - a) - osc);
    }
    double q2 = grad2 + lambda * lambda * sin2 + lambda * ssin2;
    return {q1, q2};
}

namespace {

double mu2_extrapolated(const SigmaProfile& sigma, double lambda, int n_grid) {
    return hamiltonian_eigs(sigma, lambda, 2, n_grid).extrapolated(1);
}

bool attempt_slow(const SigmaProfile& sigma, double tol, int n_grid, SlowEigenvalue& out) {
    double ls = lambda_s(sigma.l1_norm());
    double hi = -1e-6;
    double f_lo = mu2_extrapolated(sigma, ls, n_grid);
    double f_hi = mu2_extrapolated(sigma, hi, n_grid);
    double lam;
    if (std::abs(f_lo) <= std::max(1e-9, 0.1 * tol)) {
        lam = ls; // mu2 vanishes at lambda_s itself (constant-sigma boundary case)
    } else if (f_lo < 0.0 && f_hi > 0.0) {
        double a = ls, b = hi;
        for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
            double m = 0.5 * (a + b);
            if (mu2_extrapolated(sigma, m, n_grid) > 0.0)
                b = m;
            else
                a = m;
        }
        lam = 0.5 * (a + b);
    } else {
        return false; // no bracket: discretization too coarse for this profile
    }

    // det M vanishes at the true eigenvalue; polish the grid-limited root with a
    // few capped real Newton steps
    double polished = lam;
    double cap = 1e-5; // per-step movement limit keeps the polish local
    for (int it = 0; it < 8; ++it) {
        DetJet j = det_m_jet(sigma, cdouble{polished, 0.0});
        if (std::abs(j.dlambda) == 0.0) break;
        double step = std::real(j.value / j.dlambda);
        if (std::abs(step) > cap) step = step > 0 ? cap : -cap;
        polished -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(polished))) break;
    }
    if (polished > -1e-7 || polished < ls - 1e-3) polished = lam; // polish ran away

    double mu2_pol = mu2_extrapolated(sigma, polished, n_grid);
    double lam_star = std::abs(mu2_pol) <= tol ? polished : lam;
    out.lambda_star = lam_star;
    out.mu2 = lam_star == polished ? mu2_pol : mu2_extrapolated(sigma, lam_star, n_grid);
    out.det_m_abs = std::abs(det_m(sigma, cdouble{lam_star, 0.0}));
    out.lambda_s = ls;
    out.n_grid = n_grid;
    return std::abs(out.mu2) <= tol && out.det_m_abs < 10.0 * tol;
}

} // namespace

SlowEigenvalue find_slow_eigenvalue_certified(const SigmaProfile& sigma, double tol) {
    if (!(tol > 0.0)) throw domain_error("find_slow_eigenvalue needs tol > 0");
    if (!(sigma.l1_norm() > 4.0 * pi))
        throw domain_error("find_slow_eigenvalue needs l1 norm above 4*pi");
    SlowEigenvalue cert;
    for (int n_grid : {1024, 2048, 4096})
        if (attempt_slow(sigma, tol, n_grid, cert)) return cert;
    throw convergence_error(
        "no certified zero of mu_2 in [lambda_s, 0): discretization failed at 4096 points");
}

double find_slow_eigenvalue(const SigmaProfile& sigma, double tol) {
    return find_slow_eigenvalue_certified(sigma, tol).lambda_star;
}

} // namespace gtspec
