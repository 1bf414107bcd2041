#include <gtspec/spectrum.hpp>
#include <gtspec/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

namespace gtspec {

namespace {

constexpr double pi = 3.14159265358979323846;

// ---- winding number along closed paths ----------------------------------

struct WalkStatus {
    double winding = 0.0;
    bool ok = false;
    bool boundary_zero = false;
};

struct PhaseWalker {
    const SigmaProfile& sigma;
    std::function<cdouble(double)> path; // t -> lambda
    double total = 0.0;
    bool boundary_zero = false;
    int depth_limit = 48;

    cdouble eval(double t) const { return det_m(sigma, path(t)); }

    bool value_bad(const cdouble& f) const {
        return !std::isfinite(f.real()) || !std::isfinite(f.imag()) ||
               std::abs(f) < boundary_zero_threshold;
    }

    static bool pair_ok(const cdouble& fa, const cdouble& fb) {
        double ratio = std::abs(fb) / std::abs(fa);
        return std::abs(std::arg(fb / fa)) <= 0.5 * pi && ratio < 4.0 && ratio > 0.25;
    }

    // An interval is accepted only after its midpoint is evaluated and three
    // gates pass: bounded phase step and modulus ratio on both halves, and a
    // midpoint-linearity test.  The last one is what rules out an even-order
    // zero hiding on or near the path: a quadratic dip between samples keeps
    // the phase smooth and the endpoint ratios balanced, but it forces
    // |f(m) - (f(a)+f(b))/2| >= 0.25 * scale wherever the zero sits, while a
    // pure exponential within the ratio-4 gate stays below 0.28.
    void refine(double ta, double tb, const cdouble& fa, const cdouble& fb, int depth) {
        if (boundary_zero) return;
        if (depth >= depth_limit) {
            boundary_zero = true; // unresolvable phase structure: a zero hugs the path
            return;
        }
        double tm = 0.5 * (ta + tb);
        cdouble fm = eval(tm);
        if (value_bad(fm)) {
            boundary_zero = true;
            return;
        }
        double lin_err = std::abs(fm - 0.5 * (fa + fb));
        double scale = std::max({std::abs(fa), std::abs(fb), std::abs(fm)});
        if (pair_ok(fa, fm) && pair_ok(fm, fb) && lin_err <= 0.3 * scale) {
            total += std::arg(fm / fa) + std::arg(fb / fm);
            return;
        }
        refine(ta, tm, fa, fm, depth + 1);
        refine(tm, tb, fm, fb, depth + 1);
    }

    // walks t in [t0, t1] with n initial panels; returns false on boundary zero
    bool walk(double t0, double t1, int n) {
        std::vector<cdouble> f(static_cast<size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) {
            f[static_cast<size_t>(i)] = eval(t0 + (t1 - t0) * i / n);
            if (value_bad(f[static_cast<size_t>(i)])) return false;
        }
        for (int i = 0; i < n && !boundary_zero; ++i)
            refine(t0 + (t1 - t0) * i / n, t0 + (t1 - t0) * (i + 1) / n,
                   f[static_cast<size_t>(i)], f[static_cast<size_t>(i + 1)], 0);
        return !boundary_zero;
    }
};

WalkStatus winding_box(const SigmaProfile& sigma, const Box& b) {
    WalkStatus st;
    cdouble c0{b.re_lo, b.im_lo}, c1{b.re_hi, b.im_lo}, c2{b.re_hi, b.im_hi}, c3{b.re_lo, b.im_hi};
    const cdouble corners[5] = {c0, c1, c2, c3, c0};
    PhaseWalker w{sigma, {}};
    for (int e = 0; e < 4; ++e) {
        cdouble a = corners[e], d = corners[e + 1] - corners[e];
        w.path = [a, d](double t) { return a + t * d; };
        int n = std::max(6, static_cast<int>(std::ceil(std::abs(d) * 5.0)));
        if (!w.walk(0.0, 1.0, n)) {
            st.boundary_zero = true;
            return st;
        }
    }
    st.winding = w.total / (2.0 * pi);
    st.ok = std::abs(st.winding - std::round(st.winding)) < 1e-3;
    if (!st.ok) st.boundary_zero = true; // non-integer winding: also treated as unresolved
    return st;
}

WalkStatus winding_circle(const SigmaProfile& sigma, cdouble center, double r) {
    WalkStatus st;
    PhaseWalker w{sigma, [center, r](double t) { return center + r * std::exp(cdouble(0.0, t)); }};
    int n = std::max(24, static_cast<int>(std::ceil(12.0 * r)));
    if (!w.walk(0.0, 2.0 * pi, n)) {
        st.boundary_zero = true;
        return st;
    }
    st.winding = w.total / (2.0 * pi);
    st.ok = std::abs(st.winding - std::round(st.winding)) < 1e-3;
    if (!st.ok) st.boundary_zero = true;
    return st;
}

// Counts with the growing-dilation retry loop; returns the box that worked.
int count_with_dilation(const SigmaProfile& sigma, const Box& rect, Box& used) {
    double margin = 0.0;
    for (int attempt = 0; attempt <= boundary_retries; ++attempt) {
        used = rect.dilated(margin);
        WalkStatus st = winding_box(sigma, used);
        if (st.ok) return static_cast<int>(std::lround(st.winding));
        margin = (margin == 0.0) ? boundary_dilation : margin * 10.0;
    }
    throw convergence_error("zero of det M pinned to the search boundary after dilation retries");
}

// ---- Newton refinement ----------------------------------------------------

struct NewtonOut {
    cdouble lambda;
    double residual = 0.0;
    bool converged = false;
};

NewtonOut newton_det(const SigmaProfile& sigma, cdouble start, int multiplicity, int max_iter = 50) {
    NewtonOut out;
    cdouble lam = start;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        DetJet j = det_m_jet(sigma, lam);
        if (!std::isfinite(std::abs(j.value)) || std::abs(j.dlambda) == 0.0) break;
        cdouble step = static_cast<double>(multiplicity) * j.value / j.dlambda;
        lam -= step;
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(lam))) {
            converged = true;
            break;
        }
    }
    out.lambda = lam;
    out.residual = std::abs(det_m(sigma, lam));
    out.converged = converged;
    return out;
}

// |det M| minimization on a shrinking grid; last-resort fallback.
NewtonOut grid_minimize(const SigmaProfile& sigma, Box b, double tol) {
    cdouble best = b.center();
    double fbest = std::abs(det_m(sigma, best));
    for (int round = 0; round < 40; ++round) {
        for (int i = 0; i < 7; ++i)
            for (int k = 0; k < 7; ++k) {
                cdouble z{b.re_lo + b.width() * i / 6.0, b.im_lo + b.height() * k / 6.0};
                double f = std::abs(det_m(sigma, z));
                if (f < fbest) {
                    fbest = f;
                    best = z;
                }
            }
        double w = 0.35 * b.width(), h = 0.35 * b.height();
        b = {best.real() - w, best.real() + w, best.imag() - h, best.imag() + h};
    }
    return {best, fbest, fbest <= tol};
}

// ---- cluster refinement by contour moments --------------------------------

// First moment of the zeros inside a circle where the winding equals mult.
bool moment_centroid(const SigmaProfile& sigma, cdouble center, double r, int mult, cdouble& out) {
    cdouble prev{0.0, 0.0};
    for (int n = 64; n <= 2048; n *= 2) {
        cdouble acc{0.0, 0.0};
        for (int i = 0; i < n; ++i) {
            double t = 2.0 * pi * i / n;
            cdouble e = std::exp(cdouble(0.0, t));
            cdouble lam = center + r * e;
            DetJet j = det_m_jet(sigma, lam);
            if (std::abs(j.value) < boundary_zero_threshold) return false;
            acc += lam * (j.dlambda / j.value) * (r * e);
        }
        cdouble mu = acc / static_cast<double>(n) / static_cast<double>(mult);
        if (n > 64 && std::abs(mu - prev) < 1e-12 * (1.0 + std::abs(mu))) {
            out = mu;
            return true;
        }
        prev = mu;
    }
    out = prev;
    return true;
}

EigenvalueRecord refine_cluster(const SigmaProfile& sigma, const Box& box, int mult, double tol) {
    cdouble center = box.center();
    // largest circle around the box that still sees exactly this cluster
    double r = std::max(0.6 * box.diameter(), 2e-3);
    double r_good = -1.0;
    for (int shrink = 0; shrink < 6 && r_good < 0.0; ++shrink) {
        WalkStatus st = winding_circle(sigma, center, r);
        if (st.ok && std::lround(st.winding) == mult)
            r_good = r;
        else
            r *= 0.7;
    }
    if (r_good > 0.0) {
        for (double rr = 2.0 * r_good; rr <= 0.45; rr *= 2.0) {
            WalkStatus st = winding_circle(sigma, center, rr);
            if (st.ok && std::lround(st.winding) == mult)
                r_good = rr;
            else
                break;
        }
    }

    EigenvalueRecord rec;
    rec.multiplicity = mult;
    cdouble loc = center;
    bool located = false;
    if (r_good > 0.0) located = moment_centroid(sigma, center, r_good, mult, loc);

    NewtonOut polish = newton_det(sigma, loc, mult);
    double f_at_loc = std::abs(det_m(sigma, loc));
    // the polished point must stay inside the region whose winding certified
    // the cluster, or Newton may have escaped onto a neighboring zero
    bool in_region = r_good > 0.0
                         ? std::abs(polish.lambda - center) <= r_good
                         : box.contains(polish.lambda, 0.05 * box.diameter()) &&
                               std::abs(polish.lambda - loc) < 0.5;
    if (polish.converged && polish.residual <= f_at_loc && in_region) {
        rec.lambda = polish.lambda;
        rec.residual = polish.residual;
        rec.converged = polish.residual <= tol;
    } else {
        rec.lambda = loc;
        rec.residual = f_at_loc;
        rec.converged = located && f_at_loc <= tol;
    }
    return rec;
}

// ---- recursive subdivision -------------------------------------------------

constexpr double jitter_fractions[][2] = {
    {0.5, 0.5}, {0.56, 0.44}, {0.44, 0.56}, {0.62, 0.38}, {0.38, 0.62}};

void refine_box(const SigmaProfile& sigma, const Box& box, int count, double tol, int depth,
                std::vector<EigenvalueRecord>& out) {
    if (count == 0) return;
    if (depth > 64)
        throw internal_error("spectral subdivision exceeded depth limit");

    if (box.diameter() < min_cluster_diameter) {
        out.push_back(refine_cluster(sigma, box, count, tol));
        return;
    }

    // an isolated zero in a small box: jump straight to Newton.  Containment
    // is strict: near the accumulation line a twin zero can sit just across
    // the box edge, and Newton started from the center may converge onto it
    // while the in-box zero goes unreported.
    if (count == 1 && box.diameter() < 0.1) {
        NewtonOut n = newton_det(sigma, box.center(), 1);
        if (n.converged && box.contains(n.lambda) && n.residual <= tol) {
            out.push_back({n.lambda, 1, 0, n.residual, true});
            return;
        }
    }

    // very elongated boxes are bisected along the long axis only, which keeps
    // descendants near-square; otherwise split lines can shrink into the low
    // |det M| corridor of a multiple zero while the box stays large
    bool split_x = box.width() >= 0.4 * box.height();
    bool split_y = box.height() >= 0.4 * box.width();
    for (const auto& frac : jitter_fractions) {
        double xs = box.re_lo + frac[0] * box.width();
        double ys = box.im_lo + frac[1] * box.height();
        Box children[4];
        int n_children = 0;
        if (split_x && split_y) {
            children[0] = {box.re_lo, xs, box.im_lo, ys};
            children[1] = {xs, box.re_hi, box.im_lo, ys};
            children[2] = {box.re_lo, xs, ys, box.im_hi};
            children[3] = {xs, box.re_hi, ys, box.im_hi};
            n_children = 4;
        } else if (split_y) {
            children[0] = {box.re_lo, box.re_hi, box.im_lo, ys};
            children[1] = {box.re_lo, box.re_hi, ys, box.im_hi};
            n_children = 2;
        } else {
            children[0] = {box.re_lo, xs, box.im_lo, box.im_hi};
            children[1] = {xs, box.re_hi, box.im_lo, box.im_hi};
            n_children = 2;
        }
        int counts[4];
        int sum = 0;
        bool valid = true;
        for (int i = 0; i < n_children && valid; ++i) {
            WalkStatus st = winding_box(sigma, children[i]);
            if (!st.ok) {
                valid = false;
                break;
            }
            counts[i] = static_cast<int>(std::lround(st.winding));
            sum += counts[i];
        }
        if (!valid || sum != count) continue;
        for (int i = 0; i < n_children; ++i)
            refine_box(sigma, children[i], counts[i], tol, depth + 1, out);
        return;
    }

    // every split line is pinned by a (multiple) zero: treat the box as one cluster
    if (count <= 8 && box.diameter() <= 0.2) {
        out.push_back(refine_cluster(sigma, box, count, tol));
        return;
    }
    // count-1 boxes can always fall back to direct minimization
    if (count == 1) {
        NewtonOut n = newton_det(sigma, box.center(), 1);
        if (!(n.converged && box.contains(n.lambda)))
            n = grid_minimize(sigma, box, tol);
        out.push_back({n.lambda, 1, 0, n.residual, n.converged});
        return;
    }
    throw internal_error("could not subdivide a spectral box around a zero cluster");
}

bool record_order(const EigenvalueRecord& a, const EigenvalueRecord& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
}

} // namespace

// ---- Box -------------------------------------------------------------------

double Box::diameter() const { return std::hypot(width(), height()); }

bool Box::contains(cdouble z, double slack) const {
    return z.real() >= re_lo - slack && z.real() <= re_hi + slack &&
           z.imag() >= im_lo - slack && z.imag() <= im_hi + slack;
}

Box Box::dilated(double margin) const {
    return {re_lo - margin, re_hi + margin, im_lo - margin, im_hi + margin};
}

// ---- public operations ------------------------------------------------------

int count_zeros(const SigmaProfile& sigma, const Box& rect) {
    if (!(rect.re_hi > rect.re_lo) || !(rect.im_hi > rect.im_lo))
        throw domain_error("count_zeros needs a nonempty rectangle");
    Box used;
    return count_with_dilation(sigma, rect, used);
}

std::vector<EigenvalueRecord> find_eigenvalues(const SigmaProfile& sigma, const Box& rect,
                                               double tol) {
    if (!(rect.re_hi > rect.re_lo) || !(rect.im_hi > rect.im_lo))
        throw domain_error("find_eigenvalues needs a nonempty rectangle");
    Box working;
    int total = count_with_dilation(sigma, rect, working);
    std::vector<EigenvalueRecord> out;
    refine_box(sigma, working, total, tol, 0, out);
    int sum = 0;
    for (const auto& r : out) sum += r.multiplicity;
    if (sum != total)
        throw internal_error("zero count lost during subdivision");
    std::sort(out.begin(), out.end(), record_order);
    return out;
}

std::vector<cdouble> constant_sigma_spectrum(double value, int n_max) {
    if (value < 0.0) throw domain_error("jump rate must be nonnegative");
    if (n_max < 1) throw domain_error("need n_max >= 1");
    std::vector<cdouble> out;
    for (int n = 1; n <= n_max; ++n) {
        double disc = 0.25 * value * value - static_cast<double>(n) * n;
        if (disc > 0.0) {
            out.emplace_back(-0.5 * value + std::sqrt(disc), 0.0);
            out.emplace_back(-0.5 * value - std::sqrt(disc), 0.0);
        } else if (disc == 0.0) {
            out.emplace_back(-0.5 * value, 0.0);
        } else {
            out.emplace_back(-0.5 * value, std::sqrt(-disc));
            out.emplace_back(-0.5 * value, -std::sqrt(-disc));
        }
    }
    out.emplace_back(-value, 0.0);
    std::sort(out.begin(), out.end(), [](cdouble a, cdouble b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

KernelInfo kernel_info(const SigmaProfile& sigma, cdouble lambda) {
    Mat2c m = m_matrix(sigma, lambda);
    Eigen::Matrix2cd em;
    em << m.m11, m.m12, m.m21, m.m22;
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(em, Eigen::ComputeFullV);
    KernelInfo info;
    info.s_large = svd.singularValues()(0);
    info.s_small = svd.singularValues()(1);
    double tol = 1e-6 * std::max(1.0, info.s_large);
    info.dim = (info.s_small < tol ? 1 : 0) + (info.s_large < tol ? 1 : 0);
    info.vec = {svd.matrixV()(0, 1), svd.matrixV()(1, 1)};
    info.second = {svd.matrixV()(0, 0), svd.matrixV()(1, 0)};
    return info;
}

bool is_mass_mode(const SigmaProfile& sigma, const EigenvalueRecord& rec) {
    if (std::abs(rec.lambda) > 1e-7) return false;
    KernelInfo k = kernel_info(sigma, rec.lambda);
    return k.dim == 1 && std::abs(k.vec[1]) < 1e-6;
}

double default_im_cutoff(const SigmaProfile& sigma) {
    double line = sigma.l1_norm() / (4.0 * pi);
    return std::max(16.0, 4.0 * line + 8.0) + 0.37;
}

namespace {

// Lowest-|Im| clusters sitting on (or near) the accumulation line.
std::vector<EigenvalueRecord> near_line_representatives(const SigmaProfile& sigma, double line,
                                                        double cutoff, double tol) {
    double half_w = 0.35;
    for (double t = 0.0; t < cutoff; t += 1.6) {
        Box strip{line - half_w, line + half_w, t - 0.8, t + 0.8};
        Box used;
        if (count_with_dilation(sigma, strip, used) == 0) continue;
        std::vector<EigenvalueRecord> recs = find_eigenvalues(sigma, used, tol);
        std::erase_if(recs, [&](const EigenvalueRecord& r) { return is_mass_mode(sigma, r); });
        if (recs.empty()) continue;
        std::sort(recs.begin(), recs.end(), [](const EigenvalueRecord& a, const EigenvalueRecord& b) {
            return std::abs(a.lambda.imag()) < std::abs(b.lambda.imag());
        });
        std::vector<EigenvalueRecord> out{recs.front()};
        if (recs.front().lambda.imag() > 1e-9) {
            EigenvalueRecord conj = recs.front();
            conj.lambda = std::conj(conj.lambda);
            out.push_back(conj);
        }
        return out;
    }
    return {};
}

void fill_kernel_dims(const SigmaProfile& sigma, std::vector<EigenvalueRecord>& recs) {
    for (auto& r : recs) r.kernel_dim = kernel_info(sigma, r.lambda).dim;
}

// Near-constant profiles grow a forest of zeros hugging the accumulation line,
// so the gap box's left edge cannot dilate outward like the other edges: that
// retreats it INTO the forest.  A failed walk instead moves the left edge
// right; everything it excludes is at-line by construction and cannot carry
// the maximal real part (the at-line fallback covers the case where nothing
// else remains).  The other three edges dilate outward as usual.
std::vector<EigenvalueRecord> find_gap_box_eigenvalues(const SigmaProfile& sigma, double line,
                                                       double cutoff, double tol, Box& used) {
    constexpr double left_eps[] = {1e-6, 3e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
    constexpr double margins[] = {0.0, 1e-6, 1e-5, 1e-4, 1e-3};
    bool walked_any = false;
    for (double eps : left_eps) {
        for (double margin : margins) {
            Box box{line + eps, 0.02 + margin, -cutoff - margin, cutoff + margin};
            WalkStatus st = winding_box(sigma, box);
            if (!st.ok) continue;
            walked_any = true;
            int total = static_cast<int>(std::lround(st.winding));
            std::vector<EigenvalueRecord> out;
            try {
                refine_box(sigma, box, total, tol, 0, out);
            } catch (const internal_error&) {
                continue; // children pinned by the forest: retreat further
            } catch (const convergence_error&) {
                continue;
            }
            int sum = 0;
            for (const auto& r : out) sum += r.multiplicity;
            if (sum != total) throw internal_error("zero count lost during subdivision");
            std::sort(out.begin(), out.end(), record_order);
            used = box;
            return out;
        }
    }
    if (!walked_any)
        throw convergence_error("gap search box unwalkable along the accumulation line");
    throw internal_error("gap search box could not be subdivided at any left margin");
}

struct GapSearch {
    std::vector<EigenvalueRecord> inside; // strictly right of the line, mass removed
    std::vector<EigenvalueRecord> line_reps;
    double line = 0.0;
    double cutoff = 0.0;
    Box primary;
};

GapSearch gap_search(const SigmaProfile& sigma, double im_cutoff, double tol) {
    GapSearch g;
    double l1 = sigma.l1_norm();
    g.line = -l1 / (4.0 * pi);
    g.cutoff = im_cutoff > 0.0 ? im_cutoff : default_im_cutoff(sigma);
    g.primary = {g.line + 1e-6, 0.02, -g.cutoff, g.cutoff};
    g.inside = find_gap_box_eigenvalues(sigma, g.line, g.cutoff, tol, g.primary);
    std::erase_if(g.inside, [&](const EigenvalueRecord& r) {
        return r.lambda.real() <= g.line + 1e-8 || is_mass_mode(sigma, r);
    });
    if (g.inside.empty()) {
        g.line_reps = near_line_representatives(sigma, g.line, g.cutoff, tol);
        // a representative can itself sit strictly right of the line
        for (const auto& r : g.line_reps)
            if (r.lambda.real() > g.line + 1e-8) {
                g.inside.push_back(r);
            }
        if (!g.inside.empty()) g.line_reps.clear();
    }
    return g;
}

} // namespace

GapResult spectral_gap(const SigmaProfile& sigma, double im_cutoff, double tol) {
    GapResult res;
    double l1 = sigma.l1_norm();
    res.accumulation_line = -l1 / (4.0 * pi);
    if (l1 < 1e-12) {
        res.gap = 0.0;
        res.at_accumulation_line = true;
        res.leading.push_back({cdouble{0.0, 0.0}, 2, 2, 0.0, true});
        res.note = "sigma vanishes: lambda = 0 keeps the (rho, j) = (0, 1) direction, no decay";
        return res;
    }
    GapSearch g = gap_search(sigma, im_cutoff, tol);
    res.search_box = g.primary;
    res.inside = g.inside;
    if (!g.inside.empty()) {
        double max_re = -1e300;
        for (const auto& r : g.inside) max_re = std::max(max_re, r.lambda.real());
        for (const auto& r : g.inside)
            if (r.lambda.real() >= max_re - 1e-6) res.leading.push_back(r);
        std::sort(res.leading.begin(), res.leading.end(),
                  [](const EigenvalueRecord& a, const EigenvalueRecord& b) {
                      return std::abs(a.lambda.imag()) < std::abs(b.lambda.imag());
                  });
        res.gap = -max_re;
    } else {
        res.gap = l1 / (4.0 * pi);
        res.at_accumulation_line = true;
        res.leading = g.line_reps;
        res.note = "no zero strictly right of the accumulation line; gap equals l1/(4pi)";
    }
    fill_kernel_dims(sigma, res.leading);
    return res;
}

std::vector<EigenvalueRecord> leading_cluster(const SigmaProfile& sigma, double cluster_tol,
                                              double im_cutoff) {
    double l1 = sigma.l1_norm();
    if (l1 < 1e-12) {
        std::vector<EigenvalueRecord> out{{cdouble{0.0, 0.0}, 2, 2, 0.0, true}};
        return out;
    }
    GapSearch g = gap_search(sigma, im_cutoff, default_root_tol);
    std::vector<EigenvalueRecord> out;
    if (!g.inside.empty()) {
        double max_re = -1e300;
        for (const auto& r : g.inside) max_re = std::max(max_re, r.lambda.real());
        for (const auto& r : g.inside)
            if (r.lambda.real() >= max_re - cluster_tol) out.push_back(r);
    } else {
        out = g.line_reps; // representative of the accumulation crowd
    }
    std::sort(out.begin(), out.end(), record_order);
    fill_kernel_dims(sigma, out);
    return out;
}

Eigenfunction eigenvector(const SigmaProfile& sigma, cdouble lambda, int n_grid) {
    if (n_grid < 2) throw domain_error("eigenvector needs n_grid >= 2");
    Eigenfunction ef;
    ef.kernel = kernel_info(sigma, lambda);
    cdouble v0[2] = {ef.kernel.vec[0], ef.kernel.vec[1]};

    ef.x.resize(static_cast<size_t>(n_grid));
    ef.rho.resize(static_cast<size_t>(n_grid));
    ef.j.resize(static_cast<size_t>(n_grid));
    int i = 0;
    cdouble cell_start[2] = {v0[0], v0[1]};
    for (int k = 0; k < sigma.cells() && i < n_grid; ++k) {
        double a = sigma.breakpoints[static_cast<size_t>(k)];
        double b = sigma.breakpoints[static_cast<size_t>(k) + 1];
        double s = sigma.values[static_cast<size_t>(k)];
        while (i < n_grid) {
            double x = two_pi * i / n_grid;
            if (x >= b) break;
            Mat2c p = segment_propagator(s, lambda, x - a);
            ef.x[static_cast<size_t>(i)] = x;
            ef.rho[static_cast<size_t>(i)] = p.m11 * cell_start[0] + p.m12 * cell_start[1];
            ef.j[static_cast<size_t>(i)] = p.m21 * cell_start[0] + p.m22 * cell_start[1];
            ++i;
        }
        Mat2c full = segment_propagator(s, lambda, b - a);
        cdouble r0 = full.m11 * cell_start[0] + full.m12 * cell_start[1];
        cdouble j0 = full.m21 * cell_start[0] + full.m22 * cell_start[1];
        cell_start[0] = r0;
        cell_start[1] = j0;
    }
    // after the full loop cell_start holds S(0->2pi) v
    ef.periodicity_residual = std::sqrt(std::norm(cell_start[0] - v0[0]) +
                                        std::norm(cell_start[1] - v0[1]));
    return ef;
}

EigenvalueRecord find_near_line_eigenvalue(const SigmaProfile& sigma, double eps, double im_max) {
    double line = -sigma.l1_norm() / (4.0 * pi);
    for (double t = -0.5; t < im_max; t += 1.0) {
        Box strip{line - eps, line + eps, t, t + 1.0};
        Box used;
        int n = 0;
        try {
            n = count_with_dilation(sigma, strip, used);
        } catch (const convergence_error&) {
            continue; // a zero glued to this strip's frame; the next strip covers it
        }
        if (n == 0) continue;
        std::vector<EigenvalueRecord> recs = find_eigenvalues(sigma, used, default_root_tol);
        std::erase_if(recs, [&](const EigenvalueRecord& r) {
            return is_mass_mode(sigma, r) || std::abs(r.lambda.real() - line) > eps;
        });
        if (recs.empty()) continue;
        std::sort(recs.begin(), recs.end(), [&](const EigenvalueRecord& a, const EigenvalueRecord& b) {
            return std::abs(a.lambda.real() - line) < std::abs(b.lambda.real() - line);
        });
        return recs.front();
    }
    throw convergence_error("no eigenvalue found near the accumulation line within the scan range");
}

void write_spectrum_csv(std::ostream& out, std::vector<EigenvalueRecord> records) {
    std::sort(records.begin(), records.end(), record_order);
    out << "re,im,multiplicity,residual\n";
    char buf[128];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%d,%.3g\n", r.lambda.real(),
                      r.lambda.imag(), r.multiplicity, r.residual);
        out << buf;
    }
}

} // namespace gtspec
