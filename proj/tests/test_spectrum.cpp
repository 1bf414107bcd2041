#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gtspec/errors.hpp>
#include <gtspec/spectrum.hpp>

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

using namespace gtspec;

namespace {

// Distance from lambda to the nearest record; -1 when the list is empty.
double nearest(const std::vector<EigenvalueRecord>& recs, cdouble lambda) {
    double best = -1.0;
    for (const auto& r : recs) {
        double d = std::abs(r.lambda - lambda);
        if (best < 0 || d < best) best = d;
    }
    return best;
}

const EigenvalueRecord* find_record(const std::vector<EigenvalueRecord>& recs, cdouble lambda,
                                    double tol) {
    for (const auto& r : recs)
        if (std::abs(r.lambda - lambda) <= tol) return &r;
    return nullptr;
}

int total_multiplicity(const std::vector<EigenvalueRecord>& recs) {
    int n = 0;
    for (const auto& r : recs) n += r.multiplicity;
    return n;
}

} // namespace

TEST_CASE("winding counts around known zeros") {
    SigmaProfile c1 = make_constant(1.0);
    // complex pair member: locally a double zero of the determinant
    CHECK(count_zeros(c1, {-0.7, -0.3, 0.5, 1.2}) == 2);
    // defective point of the rate-2 profile: winding four
    SigmaProfile c2 = make_constant(2.0);
    CHECK(count_zeros(c2, {-1.4, -0.6, -0.4, 0.4}) == 4);
    // nothing to the right of the imaginary axis
    CHECK(count_zeros(c1, {0.1, 2.0, -5.0, 5.0}) == 0);
    // the conserved direction alone is a simple zero
    CHECK(count_zeros(c1, {-0.1, 0.1, -0.1, 0.1}) == 1);
}

TEST_CASE("constant rate 1: the full window is recovered") {
    SigmaProfile c1 = make_constant(1.0);
    Box box{-1.2, 0.05, -5.5, 5.5};
    auto recs = find_eigenvalues(c1, box);

    std::vector<std::pair<cdouble, int>> expected = {{{0.0, 0.0}, 1}, {{-1.0, 0.0}, 1}};
    for (int n = 1; n <= 5; ++n) {
        double im = std::sqrt(n * n - 0.25);
        expected.push_back({{-0.5, im}, 2});
        expected.push_back({{-0.5, -im}, 2});
    }
    CHECK(recs.size() == expected.size());
    for (const auto& [lam, mult] : expected) {
        const EigenvalueRecord* r = find_record(recs, lam, 1e-8);
        REQUIRE_MESSAGE(r != nullptr, "missing eigenvalue near ", lam.real(), "+", lam.imag(), "i");
        CHECK(r->multiplicity == mult);
        CHECK(r->converged);
        CHECK(r->residual <= 1e-9);
    }
    CHECK(total_multiplicity(recs) == 22);
    CHECK(count_zeros(c1, box) == 22);
}

TEST_CASE("constant rate 4: real branch, defective point, complex branch") {
    SigmaProfile c4 = make_constant(4.0);
    Box box{-4.51, 0.25, -5.5, 5.5};
    auto recs = find_eigenvalues(c4, box);

    double s3 = std::sqrt(3.0);
    std::vector<std::pair<cdouble, int>> expected = {
        {{0.0, 0.0}, 1},       {{-4.0, 0.0}, 1},
        {{-2.0 + s3, 0.0}, 2}, {{-2.0 - s3, 0.0}, 2},
        {{-2.0, 0.0}, 4},
    };
    for (int n = 3; n <= 5; ++n) {
        double im = std::sqrt(n * n - 4.0);
        expected.push_back({{-2.0, im}, 2});
        expected.push_back({{-2.0, -im}, 2});
    }
    CHECK(recs.size() == expected.size());
    for (const auto& [lam, mult] : expected) {
        const EigenvalueRecord* r = find_record(recs, lam, 1e-8);
        REQUIRE_MESSAGE(r != nullptr, "missing eigenvalue near ", lam.real(), "+", lam.imag(), "i");
        CHECK(r->multiplicity == mult);
    }
    CHECK(total_multiplicity(recs) == 22);
}

TEST_CASE("closed-form constant spectrum helper") {
    auto s2 = constant_sigma_spectrum(2.0, 3);
    REQUIRE(s2.size() == 6);
    CHECK(nearest({}, 0.0) == -1.0);
    auto has = [&](const std::vector<cdouble>& v, cdouble z) {
        return std::any_of(v.begin(), v.end(),
                           [&](cdouble w) { return std::abs(w - z) <= 1e-12; });
    };
    CHECK(has(s2, {-2.0, 0.0}));
    CHECK(has(s2, {-1.0, 0.0})); // coincident pair listed once
    CHECK(has(s2, {-1.0, std::sqrt(3.0)}));
    CHECK(has(s2, {-1.0, -std::sqrt(3.0)}));
    CHECK(has(s2, {-1.0, std::sqrt(8.0)}));
    CHECK(has(s2, {-1.0, -std::sqrt(8.0)}));

    auto s1 = constant_sigma_spectrum(1.0, 2);
    REQUIRE(s1.size() == 5);
    CHECK(has(s1, {-1.0, 0.0}));
    CHECK(has(s1, {-0.5, std::sqrt(0.75)}));
    CHECK(has(s1, {-0.5, -std::sqrt(3.75)}));
}

TEST_CASE("spectral gap of constant profiles") {
    GapResult g2 = spectral_gap(make_constant(2.0));
    CHECK(g2.gap == doctest::Approx(1.0).epsilon(1e-9));
    // l1 = 4pi exactly: every nonzero eigenvalue sits ON the line Re = -1
    CHECK(g2.at_accumulation_line);
    CHECK(g2.accumulation_line == doctest::Approx(-1.0).epsilon(1e-12));
    REQUIRE(!g2.leading.empty());
    CHECK(std::abs(g2.leading.front().lambda - cdouble(-1.0)) <= 1e-8);
    CHECK(g2.leading.front().kernel_dim == 2);

    GapResult g1 = spectral_gap(make_constant(1.0));
    CHECK(g1.gap == doctest::Approx(0.5).epsilon(1e-9));
    REQUIRE(g1.leading.size() == 2); // conjugate pair reported together
    double im0 = g1.leading[0].lambda.imag(), im1 = g1.leading[1].lambda.imag();
    CHECK(im0 == doctest::Approx(-im1).epsilon(1e-9));
    CHECK(std::abs(std::abs(im0) - std::sqrt(0.75)) <= 1e-8);

    GapResult g4 = spectral_gap(make_constant(4.0));
    CHECK(g4.gap == doctest::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-9));
    REQUIRE(!g4.leading.empty());
    CHECK(std::abs(g4.leading.front().lambda - cdouble(-2.0 + std::sqrt(3.0))) <= 1e-8);
}

TEST_CASE("zero rate sits on the accumulation line") {
    GapResult g0 = spectral_gap(make_constant(0.0));
    CHECK(g0.gap == 0.0);
    CHECK(g0.at_accumulation_line);
    CHECK(g0.accumulation_line == 0.0);
    CHECK(!g0.note.empty());
}

TEST_CASE("leading cluster helper matches the gap result") {
    auto lc4 = leading_cluster(make_constant(4.0));
    REQUIRE(lc4.size() == 1);
    CHECK(std::abs(lc4.front().lambda - cdouble(-2.0 + std::sqrt(3.0))) <= 1e-8);

    auto lc1 = leading_cluster(make_constant(1.0));
    CHECK(lc1.size() == 2);
    for (const auto& r : lc1)
        CHECK(r.lambda.real() == doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("mass mode detection") {
    SigmaProfile c1 = make_constant(1.0);
    auto zero = find_eigenvalues(c1, {-0.1, 0.1, -0.1, 0.1});
    REQUIRE(zero.size() == 1);
    CHECK(is_mass_mode(c1, zero.front()));

    auto minus1 = find_eigenvalues(c1, {-1.2, -0.8, -0.2, 0.2});
    REQUIRE(minus1.size() == 1);
    CHECK(!is_mass_mode(c1, minus1.front()));
}

TEST_CASE("spectrum is conjugate-symmetric with matching multiplicities") {
    std::mt19937 rng(201);
    for (int trial = 0; trial < 3; ++trial) {
        SigmaProfile p = oracles::random_profile(rng, 6, 4.0);
        GapResult g = spectral_gap(p);
        for (const auto& r : g.inside) {
            if (std::abs(r.lambda.imag()) <= 1e-8) continue;
            const EigenvalueRecord* mate = find_record(g.inside, std::conj(r.lambda), 1e-8);
            REQUIRE_MESSAGE(mate != nullptr, "missing conjugate of ", r.lambda.real(), "+",
                            r.lambda.imag(), "i");
            CHECK(mate->multiplicity == r.multiplicity);
        }
    }
}

TEST_CASE("eigenvalues live in the closed strip [-max sigma, 0]") {
    std::mt19937 rng(202);
    for (int trial = 0; trial < 3; ++trial) {
        SigmaProfile p = oracles::random_profile(rng, 8, 5.0);
        GapResult g = spectral_gap(p);
        for (const auto& r : g.inside) {
            CHECK(r.lambda.real() <= 1e-9);
            CHECK(r.lambda.real() >= -p.max_value() - 1e-9);
        }
    }
}

TEST_CASE("gap-box windings account for every record plus the conserved mode") {
    std::mt19937 rng(203);
    for (int trial = 0; trial < 3; ++trial) {
        SigmaProfile p = oracles::random_profile(rng, 6, 4.0);
        GapResult g = spectral_gap(p);
        int inside = total_multiplicity(g.inside);
        int mass = g.search_box.contains(0.0)
                       ? count_zeros(p, {-1e-4, 1e-4, -1e-4, 1e-4})
                       : 0;
        CHECK(count_zeros(p, g.search_box) == inside + mass);
    }
}

TEST_CASE("eigenfunctions close up around the torus") {
    // at a constant-profile resonance the period map is the identity, so the
    // kernel is the full two-dimensional space (winding multiplicity 2)
    Eigenfunction e1 = eigenvector(make_constant(1.0), {-0.5, std::sqrt(0.75)});
    CHECK(e1.kernel.dim == 2);
    CHECK(e1.periodicity_residual <= 1e-9);
    CHECK(e1.x.size() == e1.rho.size());
    CHECK(e1.x.size() == e1.j.size());
    CHECK(e1.x.size() == 256);

    Eigenfunction e2 = eigenvector(make_constant(2.0), -1.0);
    CHECK(e2.kernel.dim == 2); // full kernel at the defective point
    CHECK(e2.periodicity_residual <= 1e-9);

    KernelInfo k = kernel_info(make_constant(2.0), -1.0);
    CHECK(k.dim == 2);
    CHECK(k.s_large <= 1e-8);
}

TEST_CASE("near-line eigenvalues are found for random profiles") {
    std::mt19937 rng(204);
    for (int trial = 0; trial < 3; ++trial) {
        SigmaProfile p = oracles::random_profile(rng, 6, 4.0);
        double line = -p.l1_norm() / (2 * two_pi);
        EigenvalueRecord r = find_near_line_eigenvalue(p);
        CHECK(r.converged);
        CHECK(std::abs(r.lambda.real() - line) <= 0.05);
        CHECK(std::abs(det_m(p, r.lambda)) <= 1e-8);
    }
}

TEST_CASE("the gap is invariant under rotations of the profile") {
    std::mt19937 rng(205);
    SigmaProfile p = oracles::random_profile(rng, 6, 4.0);
    std::vector<double> rotated(p.values.begin() + 2, p.values.end());
    rotated.insert(rotated.end(), p.values.begin(), p.values.begin() + 2);
    SigmaProfile q = sample_uniform(rotated);
    CHECK(spectral_gap(p).gap == doctest::Approx(spectral_gap(q).gap).epsilon(1e-9));
}

TEST_CASE("spectrum CSV output") {
    std::vector<EigenvalueRecord> recs;
    recs.push_back({{-0.5, 0.9}, 2, 0, 1e-12, true});
    recs.push_back({{-1.0, 0.0}, 1, 0, 0.0, true});
    std::ostringstream out;
    write_spectrum_csv(out, recs);
    std::istringstream in(out.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "re,im,multiplicity,residual");
    REQUIRE(std::getline(in, line));
    CHECK(line.substr(0, 3) == "-1,"); // sorted by real part first
    REQUIRE(std::getline(in, line));
    CHECK(line.substr(0, 5) == "-0.5,");
    CHECK(!std::getline(in, line));
}

TEST_CASE("box helpers") {
    Box b{-1.0, 1.0, -2.0, 2.0};
    CHECK(b.width() == 2.0);
    CHECK(b.height() == 4.0);
    CHECK(b.diameter() == doctest::Approx(std::sqrt(20.0)).epsilon(1e-15));
    CHECK(b.center() == cdouble(0.0, 0.0));
    CHECK(b.contains({0.5, 1.5}));
    CHECK(!b.contains({1.5, 0.0}));
    CHECK(b.contains({1.05, 0.0}, 0.1));
    Box d = b.dilated(0.5);
    CHECK(d.re_lo == -1.5);
    CHECK(d.im_hi == 2.5);
}
