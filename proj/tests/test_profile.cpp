#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gtspec/errors.hpp>
#include <gtspec/profile.hpp>

#include <random>
#include <sstream>

using namespace gtspec;

TEST_CASE("make_piecewise validates and evaluates") {
    SigmaProfile c2 = make_piecewise({0.0, two_pi}, {2.0});
    CHECK(c2.l1_norm() == doctest::Approx(2 * two_pi).epsilon(1e-15));
    CHECK(c2.eval(1.0) == 2.0);

    SigmaProfile half = make_piecewise({0.0, two_pi / 2, two_pi}, {0.0, 4.0});
    CHECK(half.l1_norm() == doctest::Approx(2 * two_pi).epsilon(1e-15));
    CHECK(half.eval(0.1) == 0.0);
    CHECK(half.eval(4.0) == 4.0);

    CHECK_THROWS_AS(make_piecewise({0.0, two_pi}, {-1.0}), domain_error);
    CHECK_THROWS_AS(make_piecewise({0.0, 4.0, 1.0, two_pi}, {1.0, 1.0, 1.0}), format_error);
    CHECK_THROWS_AS(make_piecewise({0.1, two_pi}, {1.0}), format_error);
    CHECK_THROWS_AS(make_piecewise({0.0, two_pi}, {1.0, 2.0}), format_error);
}

TEST_CASE("l1_norm is the exact cell sum") {
    CHECK(make_constant(0.0).l1_norm() == 0.0);
    SigmaProfile p = make_piecewise({0.0, two_pi / 2, two_pi}, {1.0, 3.0});
    CHECK(p.l1_norm() == doctest::Approx(2 * two_pi).epsilon(1e-15));
}

TEST_CASE("evaluation is right-continuous and periodic") {
    SigmaProfile p = make_piecewise({0.0, 1.0, two_pi}, {5.0, 7.0});
    CHECK(p.eval(1.0) == 7.0);               // right-continuous at the breakpoint
    CHECK(p.eval(0.999999999) == 5.0);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> xd(0.0, two_pi);
    for (int i = 0; i < 50; ++i) {
        double x = xd(rng);
        CHECK(p.eval(x) == p.eval(x + two_pi));
        CHECK(p.eval(x) == p.eval(x - two_pi));
    }
}

TEST_CASE("perturb follows cellwise addition") {
    SigmaProfile c2 = make_constant(2.0);
    SigmaDirection one = make_direction({0.0, two_pi}, {1.0});

    SigmaProfile up = perturb(c2, one, 0.5);
    CHECK(up.cells() == 1);
    CHECK(up.values[0] == doctest::Approx(2.5).epsilon(1e-15));

    SigmaDirection minus = make_direction({0.0, two_pi}, {-1.0});
    CHECK_THROWS_AS(perturb(c2, minus, 3.0), domain_error);

    SigmaProfile c1 = make_constant(1.0);
    SigmaDirection ind = make_direction({0.0, two_pi / 2, two_pi}, {1.0, 0.0});
    SigmaProfile sum = perturb(c1, ind, 1.0);
    REQUIRE(sum.cells() == 2);
    CHECK(sum.values[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sum.values[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("perturb at zero is the identity, l1 is linear in eps") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> vd(0.0, 5.0);
    std::vector<double> vals(6), dirs(6);
    for (auto& v : vals) v = vd(rng);
    for (auto& d : dirs) d = vd(rng) - 2.0;
    SigmaProfile p = sample_uniform(vals);
    SigmaDirection eta;
    eta.breakpoints = p.breakpoints;
    eta.values = dirs;

    SigmaProfile same = perturb(p, eta, 0.0);
    CHECK(same.breakpoints == p.breakpoints);
    CHECK(same.values == p.values);

    double eta_integral = 0.0;
    for (int k = 0; k < 6; ++k)
        eta_integral += dirs[static_cast<size_t>(k)] * (two_pi / 6);
    for (double eps : {0.01, 0.1, 0.5}) {
        if ([&] {
                for (int k = 0; k < 6; ++k)
                    if (vals[static_cast<size_t>(k)] + eps * dirs[static_cast<size_t>(k)] < 0)
                        return true;
                return false;
            }())
            continue;
        SigmaProfile q = perturb(p, eta, eps);
        CHECK(q.l1_norm() ==
              doctest::Approx(p.l1_norm() + eps * eta_integral).epsilon(1e-13));
    }
}

TEST_CASE("cell_indicator and sample_uniform") {
    SigmaDirection e3 = cell_indicator(3, 8);
    CHECK(e3.cells() == 8);
    for (int k = 0; k < 8; ++k)
        CHECK(e3.values[static_cast<size_t>(k)] == (k == 3 ? 1.0 : 0.0));
    CHECK_THROWS_AS(cell_indicator(8, 8), domain_error);

    SigmaProfile p = sample_uniform({1.0, 2.0, 3.0, 4.0});
    CHECK(p.cells() == 4);
    CHECK(p.eval(0.1) == 1.0);
    CHECK(p.eval(two_pi * 7 / 8) == 4.0);
}

TEST_CASE("merge_breakpoints deduplicates within tolerance") {
    std::vector<double> merged =
        merge_breakpoints({0.0, 1.0, two_pi}, {0.0, 1.0 + 1e-14, 2.0, two_pi});
    REQUIRE(merged.size() == 4);
    CHECK(merged[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(merged[2] == 2.0);
}

TEST_CASE("profile file round-trip is exact") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> vd(0.0, 9.0);
    std::vector<double> vals(7);
    for (auto& v : vals) v = vd(rng);
    SigmaProfile p = sample_uniform(vals);

    std::stringstream io;
    write_profile(io, p);
    SigmaProfile q = read_profile(io);
    CHECK(q.breakpoints == p.breakpoints);
    CHECK(q.values == p.values);
}

TEST_CASE("profile parser rejects malformed input") {
    std::stringstream bad1("0 1\n3 nope\n6.283185307179586 -\n");
    CHECK_THROWS_AS(read_profile(bad1), format_error);
    std::stringstream bad2("0 1\n");
    CHECK_THROWS_AS(read_profile(bad2), format_error);
    std::stringstream neg("0 -2\n6.283185307179586 -\n");
    CHECK_THROWS_AS(read_profile(neg), domain_error);
    std::stringstream ok("# comment\n0 1.5\n3.141592653589793 0.5\n6.283185307179586 -\n");
    SigmaProfile p = read_profile(ok);
    CHECK(p.cells() == 2);
    CHECK(p.values[0] == 1.5);
    CHECK(p.values[1] == 0.5);
}
