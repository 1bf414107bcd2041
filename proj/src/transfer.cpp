#include <gtspec/transfer.hpp>
#include <gtspec/errors.hpp>

#include "dd.hpp"

#include <algorithm>
#include <cmath>

namespace gtspec {

namespace {

// Series switch for the entire functions C(z) = cosh(L sqrt z) and
// T(z) = sinh(L sqrt z)/sqrt z; below this the closed form loses digits.
constexpr double series_cutoff = 1e-3;
constexpr int series_terms = 8;

struct CT {
    cdouble c;  // cosh(L sqrt z)
    cdouble t;  // sinh(L sqrt z)/sqrt z      (T(0) = L)
    cdouble dt; // d/dz of t
};

CT eval_ct(cdouble z, double L) {
    CT r;
    double L2 = L * L;
    if (std::abs(z) * L2 < series_cutoff) {
        // c  = sum L^{2k}   z^k / (2k)!
        // t  = sum L^{2k+1} z^k / (2k+1)!
        // dt = sum k L^{2k+1} z^{k-1} / (2k+1)!
        cdouble c = 0.0, t = 0.0, dt = 0.0;
        double ccoef = 1.0, tcoef = L;
        cdouble zk = 1.0;
        for (int k = 0; k < series_terms; ++k) {
            c += ccoef * zk;
            t += tcoef * zk;
            if (k >= 1) dt += static_cast<double>(k) * tcoef * (zk / z);
            ccoef *= L2 / ((2 * k + 1) * (2 * k + 2));
            tcoef *= L2 / ((2 * k + 2) * (2 * k + 3));
            zk *= z;
        }
        // dt's z-division is unstable at tiny |z|; rebuild it termwise instead
        if (std::abs(z) * L2 < 1e-30) {
            dt = L * L2 / 6.0;
        } else {
            dt = 0.0;
            double tc = L * L2 / 6.0; // k = 1 coefficient
            cdouble zk1 = 1.0;
            for (int k = 1; k < series_terms; ++k) {
                dt += static_cast<double>(k) * tc * zk1;
                tc *= L2 / ((2 * k + 2) * (2 * k + 3));
                zk1 *= z;
            }
        }
        r.c = c;
        r.t = t;
        r.dt = dt;
    } else {
        cdouble w = std::sqrt(z); // either branch; c and t are even in w
        r.c = std::cosh(L * w);
        r.t = std::sinh(L * w) / w;
        r.dt = (L * r.c - r.t) / (2.0 * z);
    }
    return r;
}

void check_span(double x, double y) {
    if (!(x >= -breakpoint_tol && y <= two_pi + breakpoint_tol && x <= y + breakpoint_tol))
        throw domain_error("transfer span must satisfy 0 <= x <= y <= 2pi");
}

detail::Mat2dd to_dd(const Mat2c& m) {
    return {detail::from(m.m11), detail::from(m.m12),
            detail::from(m.m21), detail::from(m.m22)};
}

Mat2c from_dd(const detail::Mat2dd& m) {
    return {detail::to_complex(m.m11), detail::to_complex(m.m12),
            detail::to_complex(m.m21), detail::to_complex(m.m22)};
}

// Shared cell walk: calls step(sigma_k, length) for each cell piece in [x, y].
template <class F>
void for_each_piece(const SigmaProfile& sigma, double x, double y, F&& step) {
    const auto& bp = sigma.breakpoints;
    for (int k = 0; k < sigma.cells(); ++k) {
        double a = std::max(bp[static_cast<size_t>(k)], x);
        double b = std::min(bp[static_cast<size_t>(k) + 1], y);
        if (b - a > 0.0)
            step(sigma.values[static_cast<size_t>(k)], b - a);
    }
}

} // namespace

Mat2c operator*(const Mat2c& a, const Mat2c& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
}

Mat2c operator-(const Mat2c& a, const Mat2c& b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
}

Mat2c operator+(const Mat2c& a, const Mat2c& b) {
    return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
}

Mat2cJet operator*(const Mat2cJet& a, const Mat2cJet& b) {
    return {a.value * b.value, a.dlambda * b.value + a.value * b.dlambda};
}

double Mat2c::frobenius() const {
    return std::sqrt(std::norm(m11) + std::norm(m12) + std::norm(m21) + std::norm(m22));
}

double Mat2c::norm2() const {
    // singular values from ||.||_F^2 and |det|: s1^2 + s2^2 = f, s1^2 s2^2 = d
    double f = std::norm(m11) + std::norm(m12) + std::norm(m21) + std::norm(m22);
    double d = std::norm(det());
    double disc = std::max(0.0, f * f - 4.0 * d);
    return std::sqrt(0.5 * (f + std::sqrt(disc)));
}

Mat2c segment_propagator(double sigma, cdouble lambda, double length) {
    if (sigma < 0.0) throw domain_error("jump rate must be nonnegative");
    if (length < 0.0) throw domain_error("segment length must be nonnegative");
    CT ct = eval_ct(lambda * (lambda + sigma), length);
    return {ct.c, -(lambda + sigma) * ct.t, -lambda * ct.t, ct.c};
}

Mat2cJet segment_propagator_jet(double sigma, cdouble lambda, double length) {
    if (sigma < 0.0) throw domain_error("jump rate must be nonnegative");
    if (length < 0.0) throw domain_error("segment length must be nonnegative");
    cdouble z = lambda * (lambda + sigma);
    cdouble dz = 2.0 * lambda + sigma;
    CT ct = eval_ct(z, length);
    cdouble dc = 0.5 * length * ct.t * dz; // dC/dz = L T / 2
    cdouble dt = ct.dt * dz;
    Mat2cJet jet;
    jet.value = {ct.c, -(lambda + sigma) * ct.t, -lambda * ct.t, ct.c};
    jet.dlambda = {dc, -(lambda + sigma) * dt - ct.t, -lambda * dt - ct.t, dc};
    return jet;
}

Mat2c solve_transfer(const SigmaProfile& sigma, cdouble lambda, double x, double y) {
    check_span(x, y);
    if (sigma.cells() > compensated_cell_threshold) {
        detail::Mat2dd acc = to_dd(Mat2c::identity());
        for_each_piece(sigma, x, y, [&](double s, double len) {
            acc = detail::mul(to_dd(segment_propagator(s, lambda, len)), acc);
        });
        return from_dd(acc);
    }
    Mat2c acc = Mat2c::identity();
    for_each_piece(sigma, x, y, [&](double s, double len) {
        acc = segment_propagator(s, lambda, len) * acc;
    });
    return acc;
}

Mat2c m_matrix(const SigmaProfile& sigma, cdouble lambda) {
    return Mat2c::identity() - solve_transfer(sigma, lambda, 0.0, two_pi);
}

cdouble det_m(const SigmaProfile& sigma, cdouble lambda) {
    return m_matrix(sigma, lambda).det();
}

Mat2cJet m_matrix_jet(const SigmaProfile& sigma, cdouble lambda) {
    Mat2cJet acc{Mat2c::identity(), Mat2c{}};
    for_each_piece(sigma, 0.0, two_pi, [&](double s, double len) {
        acc = segment_propagator_jet(s, lambda, len) * acc;
    });
    return {Mat2c::identity() - acc.value,
            Mat2c{} - acc.dlambda};
}

DetJet det_m_jet(const SigmaProfile& sigma, cdouble lambda) {
    Mat2cJet m = m_matrix_jet(sigma, lambda);
    const Mat2c& v = m.value;
    const Mat2c& d = m.dlambda;
    return {v.det(),
            d.m11 * v.m22 + v.m11 * d.m22 - d.m12 * v.m21 - v.m12 * d.m21};
}

Mat2c asymptotic_m(double l1, cdouble lambda) {
    if (l1 < 0.0) throw domain_error("l1 norm must be nonnegative");
    cdouble w = two_pi * lambda + 0.5 * l1;
    cdouble ch = std::cosh(w), sh = std::sinh(w);
    return {1.0 - ch, sh, sh, 1.0 - ch};
}

double growth_bound(const SigmaProfile& sigma, cdouble lambda, double x, double y) {
    check_span(x, y);
    return std::exp(std::abs(lambda.real()) * (y - x) + 0.5 * sigma.l1_norm());
}

} // namespace gtspec
