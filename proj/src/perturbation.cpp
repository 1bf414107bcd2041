#include <gtspec/perturbation.hpp>
#include <gtspec/errors.hpp>

#include <algorithm>
#include <cmath>

namespace gtspec {

namespace {

// Gauss-Legendre order 8 on [-1, 1]
constexpr double gl_x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                            0.7966664774136267,  0.9602898564975363};
constexpr double gl_w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                            0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

struct PieceIntegral {
    double a, b;
    cdouble jj;       // int j1^2
    cdouble jj_rr;    // int (j1^2 - rho1^2)
};

int auto_panels(double len, double lambda_mag) {
    return std::max(1, static_cast<int>(std::ceil(len * (1.0 + lambda_mag) / 1.5)));
}

// Integrates j1^2 and j1^2 - rho1^2 over every piece of the given partition,
// where (rho1, j1) solves the eigenvalue ODE from the initial vector v0 at 0.
std::vector<PieceIntegral> integrate_products(const SigmaProfile& sigma, cdouble lambda,
                                              const std::array<cdouble, 2>& v0,
                                              const std::vector<double>& cuts, int n_quad) {
    std::vector<PieceIntegral> out;
    out.reserve(cuts.size());
    cdouble va[2] = {v0[0], v0[1]};
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        double s = sigma.eval(0.5 * (a + b));
        PieceIntegral pi{a, b, {0.0, 0.0}, {0.0, 0.0}};
        int panels = n_quad > 0 ? n_quad : auto_panels(b - a, std::abs(lambda));
        for (int p = 0; p < panels; ++p) {
            double p0 = a + (b - a) * p / panels;
            double p1 = a + (b - a) * (p + 1) / panels;
            double mid = 0.5 * (p0 + p1), hh = 0.5 * (p1 - p0);
            for (int q = 0; q < 8; ++q) {
                double x = mid + hh * gl_x[q];
                Mat2c t = segment_propagator(s, lambda, x - a);
                cdouble rho = t.m11 * va[0] + t.m12 * va[1];
                cdouble j = t.m21 * va[0] + t.m22 * va[1];
                double w = gl_w[q] * hh;
                pi.jj += w * j * j;
                pi.jj_rr += w * (j * j - rho * rho);
            }
        }
        out.push_back(pi);
        Mat2c full = segment_propagator(s, lambda, b - a);
        cdouble r = full.m11 * va[0] + full.m12 * va[1];
        cdouble j = full.m21 * va[0] + full.m22 * va[1];
        va[0] = r;
        va[1] = j;
    }
    return out;
}

std::vector<double> merged_cuts(const SigmaProfile& sigma, const std::vector<double>& extra) {
    std::vector<double> cuts = sigma.breakpoints;
    cuts.insert(cuts.end(), extra.begin(), extra.end());
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> out;
    for (double c : cuts)
        if (out.empty() || c - out.back() > breakpoint_tol) out.push_back(c);
    out.front() = 0.0;
    out.back() = two_pi;
    return out;
}

WronskianConstants constants_from_vector(const SigmaProfile& sigma, cdouble lambda,
                                         const SigmaDirection& eta,
                                         const std::array<cdouble, 2>& v1, int n_quad) {
    WronskianConstants wc;
    wc.v1 = v1;
    wc.v2 = {-std::conj(v1[1]), std::conj(v1[0])};
    std::vector<PieceIntegral> parts =
        integrate_products(sigma, lambda, v1, merged_cuts(sigma, eta.breakpoints), n_quad);
    wc.c = {0.0, 0.0};
    wc.d = {0.0, 0.0};
    for (const auto& p : parts) {
        wc.c += p.jj_rr;
        wc.d += p.jj * eta.eval(0.5 * (p.a + p.b));
    }
    return wc;
}

} // namespace

WronskianConstants wronskian_constants(const SigmaProfile& sigma, cdouble lambda,
                                       const SigmaDirection& eta, int n_quad) {
    KernelInfo k = kernel_info(sigma, lambda);
    WronskianConstants wc = constants_from_vector(sigma, lambda, eta, k.vec, n_quad);
    if (std::abs(wc.c) < 1e-10)
        throw degeneracy_error("Wronskian constant c vanishes: eigenvalue is not simple");
    return wc;
}

cdouble eigen_derivative(const SigmaProfile& sigma, cdouble lambda, const SigmaDirection& eta,
                         int n_quad) {
    WronskianConstants wc = wronskian_constants(sigma, lambda, eta, n_quad);
    return -wc.d / wc.c;
}

std::vector<double> gap_gradient(const SigmaProfile& sigma, cdouble lambda, int K, int n_quad) {
    if (K < 1) throw domain_error("gap_gradient needs K >= 1");
    KernelInfo kern = kernel_info(sigma, lambda);
    std::vector<double> cell_edges(static_cast<size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) cell_edges[static_cast<size_t>(k)] = two_pi * k / K;
    std::vector<double> cuts = merged_cuts(sigma, cell_edges);

    // one pass per kernel basis vector; a benign 2-dimensional kernel is averaged
    std::vector<std::array<cdouble, 2>> starts{kern.vec};
    if (kern.dim >= 2) starts.push_back(kern.second);

    std::vector<double> grad(static_cast<size_t>(K), 0.0);
    int used = 0;
    for (const auto& v : starts) {
        std::vector<PieceIntegral> parts = integrate_products(sigma, lambda, v, cuts, n_quad);
        cdouble c{0.0, 0.0};
        for (const auto& p : parts) c += p.jj_rr;
        if (std::abs(c) < 1e-10) {
            if (kern.dim >= 2 && starts.size() > 1)
                throw degeneracy_error(
                    "Wronskian constant c vanishes on a 2-dimensional kernel: defective eigenvalue");
            throw degeneracy_error("Wronskian constant c vanishes: eigenvalue is not simple");
        }
        for (const auto& p : parts) {
            int k = std::min(K - 1, static_cast<int>(0.5 * (p.a + p.b) / (two_pi / K)));
            grad[static_cast<size_t>(k)] += std::real(-p.jj / c);
        }
        ++used;
    }
    for (auto& g : grad) g /= used;
    return grad;
}

Mat2c tilde_m_entries(const SigmaProfile& sigma, cdouble lambda0, cdouble dlambda) {
    KernelInfo k = kernel_info(sigma, lambda0);
    std::array<cdouble, 2> v1 = k.vec;
    std::array<cdouble, 2> v2 = {-std::conj(v1[1]), std::conj(v1[0])};
    Mat2c m = m_matrix(sigma, lambda0 + dlambda);
    auto apply = [&m](const std::array<cdouble, 2>& v) {
        return std::array<cdouble, 2>{m.m11 * v[0] + m.m12 * v[1], m.m21 * v[0] + m.m22 * v[1]};
    };
    auto dot = [](const std::array<cdouble, 2>& u, const std::array<cdouble, 2>& v) {
        return u[0] * std::conj(v[0]) + u[1] * std::conj(v[1]);
    };
    std::array<cdouble, 2> mv1 = apply(v1), mv2 = apply(v2);
    return {dot(mv1, v1), dot(mv2, v1), dot(mv1, v2), dot(mv2, v2)};
}

SimpleCheck simple_eigenvalue_check(const SigmaProfile& sigma, cdouble lambda0, double dlambda) {
    if (!(dlambda > 0.0)) throw domain_error("simple_eigenvalue_check needs dlambda > 0");
    Mat2c full = tilde_m_entries(sigma, lambda0, cdouble{dlambda, 0.0});
    Mat2c half = tilde_m_entries(sigma, lambda0, cdouble{0.5 * dlambda, 0.0});
    SimpleCheck out;
    out.ratio21 = std::abs(full.m21) / std::abs(half.m21);
    out.ratio11 = std::abs(full.m11) / std::abs(half.m11);
    out.c_fit = (4.0 * half.m21 - full.m21) / dlambda;
    out.b_fit = half.m12;
    out.consistent = std::abs(out.ratio21 - 2.0) <= 0.25 && std::abs(out.c_fit) > 1e-8;
    return out;
}

} // namespace gtspec
