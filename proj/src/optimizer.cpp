#include "gtspec/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "gtspec/errors.hpp"
#include "gtspec/perturbation.hpp"

namespace gtspec {

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::gradient_small: return "gradient-small";
        case StopReason::degenerate_leading_cluster: return "degenerate-leading-cluster";
        case StopReason::max_iters: return "max-iters";
    }
    return "unknown";
}

double constant_gap(double sigma_value) {
    if (sigma_value < 0.0) throw domain_error("constant_gap: negative rate");
    if (sigma_value <= 2.0) return 0.5 * sigma_value;
    return 0.5 * sigma_value - std::sqrt(0.25 * sigma_value * sigma_value - 1.0);
}

std::vector<GapCurvePoint> gap_curve_constant(double sigma_min, double sigma_max, int steps) {
    if (!(sigma_min >= 0.0) || !(sigma_min < sigma_max))
        throw domain_error("gap_curve_constant: need 0 <= sigma_min < sigma_max");
    if (steps < 2) throw domain_error("gap_curve_constant: need at least 2 steps");
    std::vector<GapCurvePoint> curve(static_cast<size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        double s = sigma_min + (sigma_max - sigma_min) * i / (steps - 1);
        curve[static_cast<size_t>(i)] = {s, constant_gap(s)};
    }
    // cross-check the closed form against the spectral solver at 5 points
    for (int j = 0; j < 5; ++j) {
        int i = static_cast<int>(std::lround(j * (steps - 1) / 4.0));
        const auto& pt = curve[static_cast<size_t>(i)];
        double solver = spectral_gap(make_constant(pt.sigma)).gap;
        if (std::abs(solver - pt.gap) > 1e-8)
            throw internal_error("gap_curve_constant: closed form and solver disagree at sigma=" +
                                 std::to_string(pt.sigma));
    }
    return curve;
}

namespace {

// Gaussian solve of the small symmetric system G w = rhs; false if singular.
bool solve_small(std::vector<std::vector<double>> G, std::vector<double> rhs,
                 std::vector<double>& w) {
    int r = static_cast<int>(rhs.size());
    double scale = 1e-300;
    for (auto& row : G)
        for (double v : row) scale = std::max(scale, std::abs(v));
    for (int c = 0; c < r; ++c) {
        int piv = c;
        for (int i = c + 1; i < r; ++i)
            if (std::abs(G[static_cast<size_t>(i)][static_cast<size_t>(c)]) >
                std::abs(G[static_cast<size_t>(piv)][static_cast<size_t>(c)]))
                piv = i;
        if (std::abs(G[static_cast<size_t>(piv)][static_cast<size_t>(c)]) < 1e-13 * scale)
            return false;
        std::swap(G[static_cast<size_t>(c)], G[static_cast<size_t>(piv)]);
        std::swap(rhs[static_cast<size_t>(c)], rhs[static_cast<size_t>(piv)]);
        for (int i = c + 1; i < r; ++i) {
            double f = G[static_cast<size_t>(i)][static_cast<size_t>(c)] /
                       G[static_cast<size_t>(c)][static_cast<size_t>(c)];
            for (int kk = c; kk < r; ++kk)
                G[static_cast<size_t>(i)][static_cast<size_t>(kk)] -=
                    f * G[static_cast<size_t>(c)][static_cast<size_t>(kk)];
            rhs[static_cast<size_t>(i)] -= f * rhs[static_cast<size_t>(c)];
        }
    }
    w.assign(static_cast<size_t>(r), 0.0);
    for (int i = r - 1; i >= 0; --i) {
        double s = rhs[static_cast<size_t>(i)];
        for (int kk = i + 1; kk < r; ++kk)
            s -= G[static_cast<size_t>(i)][static_cast<size_t>(kk)] * w[static_cast<size_t>(kk)];
        w[static_cast<size_t>(i)] = s / G[static_cast<size_t>(i)][static_cast<size_t>(i)];
    }
    return true;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

} // namespace

std::vector<double> min_norm_hull_point(const std::vector<std::vector<double>>& vectors) {
    if (vectors.empty()) return {};
    size_t dim = vectors[0].size();
    for (const auto& v : vectors)
        if (v.size() != dim) throw domain_error("min_norm_hull_point: mixed dimensions");

    // drop duplicates (conjugate eigenvalues give identical gradients)
    std::vector<std::vector<double>> g;
    for (const auto& v : vectors) {
        bool dup = false;
        for (const auto& u : g) {
            double diff = 0.0, mag = 1.0;
            for (size_t i = 0; i < dim; ++i) {
                diff = std::max(diff, std::abs(v[i] - u[i]));
                mag = std::max(mag, std::abs(v[i]));
            }
            if (diff <= 1e-10 * mag) { dup = true; break; }
        }
        if (!dup) g.push_back(v);
    }
    int m = static_cast<int>(g.size());
    if (m == 1) return g[0];
    if (m > 12) g.resize(12), m = 12; // hull faces beyond this are not realistic here

    // min ||sum w_i g_i||, w in the simplex: the minimizer lies on some face;
    // enumerate faces, solve the equality-constrained system on each, and
    // accept the first candidate that passes the global optimality test.
    std::vector<double> best;
    double best_norm = 0.0;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        int r = static_cast<int>(idx.size());
        // KKT system of min w^T G w subject to sum w = 1 (bordered so a
        // singular Gram, e.g. opposite vectors, still solves cleanly)
        std::vector<std::vector<double>> A(static_cast<size_t>(r) + 1,
                                           std::vector<double>(static_cast<size_t>(r) + 1, 0.0));
        for (int i = 0; i < r; ++i) {
            for (int jj = 0; jj < r; ++jj)
                A[static_cast<size_t>(i)][static_cast<size_t>(jj)] =
                    2.0 * dot(g[static_cast<size_t>(idx[static_cast<size_t>(i)])],
                              g[static_cast<size_t>(idx[static_cast<size_t>(jj)])]);
            A[static_cast<size_t>(i)][static_cast<size_t>(r)] = 1.0;
            A[static_cast<size_t>(r)][static_cast<size_t>(i)] = 1.0;
        }
        std::vector<double> rhs(static_cast<size_t>(r) + 1, 0.0);
        rhs[static_cast<size_t>(r)] = 1.0;
        std::vector<double> wnu;
        if (!solve_small(A, rhs, wnu)) continue;
        std::vector<double> w(wnu.begin(), wnu.begin() + r);
        bool feasible = true;
        for (double x : w)
            if (x < -1e-10) feasible = false;
        if (!feasible) continue;
        std::vector<double> p(dim, 0.0);
        for (int i = 0; i < r; ++i)
            for (size_t kk = 0; kk < dim; ++kk)
                p[kk] += w[static_cast<size_t>(i)] *
                         g[static_cast<size_t>(idx[static_cast<size_t>(i)])][kk];
        double n2 = dot(p, p);
        bool optimal = true;
        for (int jj = 0; jj < m; ++jj)
            if (dot(g[static_cast<size_t>(jj)], p) < n2 - 1e-9 * (1.0 + n2)) {
                optimal = false;
                break;
            }
        if (optimal) return p;
        if (best.empty() || n2 < best_norm) best = p, best_norm = n2;
    }
    if (!best.empty()) return best;
    // all faces degenerate: fall back to the shortest input vector
    size_t arg = 0;
    for (size_t i = 1; i < g.size(); ++i)
        if (norm2(g[i]) < norm2(g[arg])) arg = i;
    return g[arg];
}

namespace {

SigmaProfile project_to_cells(const SigmaProfile& p, int K) {
    std::vector<double> vals(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k)
        vals[static_cast<size_t>(k)] = std::max(0.0, p.eval((k + 0.5) * two_pi / K));
    return sample_uniform(vals);
}

SigmaProfile stepped_profile(const SigmaProfile& p, const std::vector<double>& dir, double alpha) {
    std::vector<double> vals(p.values);
    for (size_t k = 0; k < vals.size(); ++k) vals[k] = std::max(0.0, vals[k] + alpha * dir[k]);
    return sample_uniform(vals);
}

struct GapEval {
    double gap = 0.0;
    std::vector<EigenvalueRecord> cluster;
    int cluster_size = 0;
};

GapEval evaluate(const SigmaProfile& p, const OptOptions& opts) {
    GapEval ev;
    if (std::abs(opts.cluster_tol - 1e-6) < 1e-18) {
        auto res = spectral_gap(p, opts.im_cutoff);
        ev.gap = res.gap;
        ev.cluster = res.leading;
    } else {
        ev.cluster = leading_cluster(p, opts.cluster_tol, opts.im_cutoff);
        auto res = spectral_gap(p, opts.im_cutoff);
        ev.gap = res.gap;
    }
    for (const auto& r : ev.cluster) ev.cluster_size += r.multiplicity;
    return ev;
}

} // namespace

OptResult optimize_gap(const SigmaProfile& initial, int K, int max_iters,
                       const OptOptions& opts) {
    if (K < 1) throw domain_error("optimize_gap: need at least one cell");
    if (max_iters < 0) throw domain_error("optimize_gap: negative iteration budget");

    OptResult out;
    SigmaProfile sigma = project_to_cells(initial, K);
    GapEval cur = evaluate(sigma, opts);
    out.trajectory.push_back({sigma, cur.gap, cur.cluster_size});

    for (int iter = 0; iter < max_iters; ++iter) {
        // per-member ascent gradients of the leading cluster
        std::vector<std::vector<double>> members;
        bool defective = false;
        for (const auto& rec : cur.cluster) {
            int kdim = rec.kernel_dim;
            if (kdim == 0) kdim = kernel_info(sigma, rec.lambda).dim;
            if (rec.multiplicity > std::max(1, kdim)) { defective = true; break; }
            try {
                auto dre = gap_gradient(sigma, rec.lambda, K);
                for (double& v : dre) v = -v; // gap = -Re lambda
                members.push_back(std::move(dre));
            } catch (const degeneracy_error&) {
                defective = true;
                break;
            }
        }
        if (defective || members.empty()) {
            out.stop_reason = StopReason::degenerate_leading_cluster;
            out.converged = true;
            break;
        }

        std::vector<double> p = min_norm_hull_point(members);
        double pnorm = norm2(p);
        if (pnorm <= opts.grad_tol) {
            out.stop_reason = StopReason::gradient_small;
            out.converged = true;
            break;
        }
        std::vector<double> dir = p;
        for (double& v : dir) v /= pnorm; // scale-free steps

        // Armijo backtracking on the true gap
        bool accepted = false;
        double alpha = opts.alpha0;
        for (int bt = 0; bt < opts.max_backtracks; ++bt, alpha *= 0.5) {
            SigmaProfile trial = stepped_profile(sigma, dir, alpha);
            GapEval ev = evaluate(trial, opts);
            if (ev.gap >= cur.gap + opts.armijo_c * alpha * pnorm) {
                sigma = std::move(trial);
                cur = std::move(ev);
                out.trajectory.push_back({sigma, cur.gap, cur.cluster_size});
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // no step of any size improves the gap: stationary for this method
            out.stop_reason = StopReason::gradient_small;
            out.converged = true;
            break;
        }
        if (iter == max_iters - 1) out.stop_reason = StopReason::max_iters;
    }
    if (max_iters == 0) out.stop_reason = StopReason::max_iters;
    out.final = sigma;
    return out;
}

void write_trajectory_csv(std::ostream& out, const OptResult& result) {
    int K = result.final.cells();
    out << "iter,gap,cluster_size";
    for (int k = 0; k < K; ++k) out << ",sigma_" << k;
    out << "\n";
    char buf[64];
    for (size_t i = 0; i < result.trajectory.size(); ++i) {
        const auto& it = result.trajectory[i];
        out << i;
        std::snprintf(buf, sizeof buf, ",%.12g,%d", it.gap, it.cluster_size);
        out << buf;
        for (double v : it.sigma.values) {
            std::snprintf(buf, sizeof buf, ",%.12g", v);
            out << buf;
        }
        out << "\n";
    }
}

void write_gap_curve_csv(std::ostream& out, const std::vector<GapCurvePoint>& curve) {
    out << "sigma,gap\n";
    char buf[64];
    for (const auto& pt : curve) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", pt.sigma, pt.gap);
        out << buf;
    }
}

} // namespace gtspec
