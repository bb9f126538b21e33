#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "smm/problem.hpp"
#include "smm/saa.hpp"
#include "test_util.hpp"

using namespace smm;

namespace {

// min over [0,1]^2 of E[ [xi'x + (x1+x2)]_+ ] with both G and F present.
CompoundProblem linear_instance() {
    CompoundProblem p;
    p.outer = testutil::outer1(testutil::hinge({1.0, 1.0}));
    p.G = RandomFn::smooth(
        1,
        testutil::scalar_fn([](const Vec& x, const Vec& xi) { return xi[0] * x[0] + xi[1] * x[1]; },
                            [](const Vec&, const Vec& xi) { return Vec{xi[0], xi[1]}; }),
        0.0);
    p.F = RandomFn::smooth(
        1,
        testutil::scalar_fn([](const Vec& x, const Vec&) { return x[0] + x[1]; },
                            [](const Vec&, const Vec&) { return Vec{1.0, 1.0}; }),
        0.0);
    p.X = FeasibleSet::box({0.0, 0.0}, {1.0, 1.0});
    p.xi_dist = DistributionSpec::gaussian({0.5, -0.5}, {1.0, 1.0});
    return p;
}

}  // namespace

TEST_CASE("a well-formed linear instance passes every probe") {
    const auto report = validate_problem(linear_instance(), 50, 7);
    CHECK(report.all_passed());
    for (const char* name :
         {"convexity", "isotonicity", "touching", "majorization", "curvature-bound"}) {
        const auto* c = report.find(name);
        REQUIRE(c != nullptr);
        CHECK(!c->skipped);
        CHECK(c->passed);
        CHECK(c->worst_violation <= 1e-8);
    }
}

TEST_CASE("a non-isotone phi is caught on a negative-image instance") {
    // phi(t) = t^2 is convex but decreasing on t < 0; with G = x on X = [-1,0]
    // the inner image is negative, so upward bumps reduce phi.
    CompoundProblem p;
    ScalarOracle square;
    square.eval = [](const Vec& u) { return u[0] * u[0]; };
    square.subgrad = [](const Vec& u) { return Vec{2.0 * u[0]}; };
    p.outer = testutil::outer1(square);
    p.G = RandomFn::smooth(1,
                           testutil::scalar_fn([](const Vec& x, const Vec&) { return x[0]; },
                                               [](const Vec&, const Vec&) { return Vec{1.0}; }),
                           0.0);
    p.F = RandomFn::none();
    p.X = FeasibleSet::interval(-1.0, 0.0);
    p.xi_dist = DistributionSpec::gaussian({0.0}, {1.0});

    const auto report = validate_problem(p, 50, 7);
    CHECK(!report.all_passed());
    CHECK(!report.find("isotonicity")->passed);
    CHECK(report.find("isotonicity")->worst_violation > 1e-8);
    CHECK(report.find("convexity")->passed);  // t^2 is still convex
}

TEST_CASE("an understated curvature bound is caught on x^2 - |x|") {
    auto make = [](double kappa0) {
        CompoundProblem p;
        p.outer = testutil::outer1(testutil::hinge({1.0}, 2.0));
        p.G = RandomFn::dc_smooth(
            1,
            testutil::scalar_fn([](const Vec& x, const Vec&) { return x[0] * x[0]; },
                                [](const Vec& x, const Vec&) { return Vec{2.0 * x[0]}; }),
            testutil::scalar_fn(
                [](const Vec& x, const Vec&) { return std::fabs(x[0]); },
                [](const Vec& x, const Vec&) { return Vec{testutil::abs_subgrad(x[0])}; }),
            kappa0);
        p.F = RandomFn::none();
        p.X = FeasibleSet::interval(-2.0, 2.0);
        p.xi_dist = DistributionSpec::gaussian({0.0}, {1.0});
        return p;
    };

    // |x| has a kink: no finite gradient-Lipschitz bound exists, so declaring
    // kappa0 = 0 must fail the curvature probe while the majorant contracts
    // (touching, majorization, convexity) still hold.
    const auto lying = validate_problem(make(0.0), 50, 3);
    CHECK(!lying.all_passed());
    CHECK(!lying.find("curvature-bound")->passed);
    CHECK(lying.find("touching")->passed);
    CHECK(lying.find("majorization")->passed);
    CHECK(lying.find("convexity")->passed);

    // Declaring no bound (NaN) skips the probe instead.
    const auto honest = validate_problem(make(std::numeric_limits<double>::quiet_NaN()), 50, 3);
    CHECK(honest.all_passed());
    CHECK(honest.find("curvature-bound")->skipped);
}

TEST_CASE("dimension mismatches are structural errors, not probe failures") {
    CompoundProblem p = linear_instance();
    // Declare dimension 2 but return a 1-vector.
    p.G.dim_out = 2;
    CHECK_THROWS_WITH_AS(validate_problem(p, 10, 1), doctest::Contains("G value dimension"),
                         std::invalid_argument);

    CompoundProblem q = linear_instance();
    q.outer.phi[0].subgrad = [](const Vec&) { return Vec{1.0}; };  // should be 2-D
    CHECK_THROWS_WITH_AS(validate_problem(q, 10, 1), doctest::Contains("phi subgradient"),
                         std::invalid_argument);

    CompoundProblem r = linear_instance();
    r.G = RandomFn::none();
    r.F = RandomFn::none();
    CHECK_THROWS_AS(validate_problem(r, 10, 1), std::invalid_argument);
}

namespace {

// Theta(x) = psi(phi(G(x, xi))) on the one-row empirical distribution, so SAA
// with that single row evaluates the deterministic compound exactly.
CompoundProblem deterministic_scalar(std::function<double(double, double)> g,
                                     std::function<double(double, double)> dg,
                                     FeasibleSet X) {
    CompoundProblem p;
    p.outer = testutil::outer1(testutil::affine({1.0}));
    p.G = RandomFn::smooth(
        1,
        testutil::scalar_fn([g](const Vec& x, const Vec& xi) { return g(x[0], xi[0]); },
                            [dg](const Vec& x, const Vec& xi) { return Vec{dg(x[0], xi[0])}; }),
        0.0);
    p.F = RandomFn::none();
    p.X = std::move(X);
    p.xi_dist = DistributionSpec::empirical({{2.0}});
    return p;
}

}  // namespace

TEST_CASE("penalization with no constraints returns the objective unchanged") {
    const CompoundProblem obj = deterministic_scalar(
        [](double x, double xi) { return xi * x; }, [](double, double xi) { return xi; },
        FeasibleSet::interval(0.0, 2.0));
    const CompoundProblem out = penalize_constraints(obj, {}, 10.0);
    CHECK(out.lg() == 1);
    CHECK(out.lf() == 0);
    SampleBatch b;
    b.rows = {{2.0}};
    CHECK(saa_objective(out, b, {}, {1.5}) == doctest::Approx(3.0));
}

TEST_CASE("penalization adds rho times the positive part of each constraint") {
    // Objective 2x, constraint x - 1 <= 0, rho = 10, on X = [0,2].
    const CompoundProblem obj = deterministic_scalar(
        [](double x, double xi) { return xi * x; }, [](double, double xi) { return xi; },
        FeasibleSet::interval(0.0, 2.0));
    const CompoundProblem con = deterministic_scalar(
        [](double x, double xi) { return 0.5 * xi * x - 1.0; },
        [](double, double xi) { return 0.5 * xi; }, FeasibleSet::interval(0.0, 2.0));
    const CompoundProblem pen = penalize_constraints(obj, {con}, 10.0);

    CHECK(pen.lg() == 2);
    CHECK(pen.outer.lphi() == 2);
    CHECK(pen.outer.lip_psi == doctest::Approx(1.0 + 10.0));

    SampleBatch b;
    b.rows = {{2.0}};
    // Violated at x = 2: 4 + 10 * (2 - 1) = 14.
    CHECK(saa_objective(pen, b, {}, {2.0}) == doctest::Approx(14.0));
    // Satisfied at x = 0.5: penalty vanishes, value = objective = 1.
    CHECK(saa_objective(pen, b, {}, {0.5}) == doctest::Approx(1.0));
    // Boundary of feasibility at x = 1: the zero piece wins the hinge tie.
    CHECK(saa_objective(pen, b, {}, {1.0}) == doctest::Approx(2.0));
    const Vec g_tie = pen.outer.psi.subgrad({2.0, 0.0});
    CHECK(g_tie == Vec{1.0, 0.0});
    const Vec g_hot = pen.outer.psi.subgrad({4.0, 1.0});
    CHECK(g_hot == Vec{1.0, 10.0});

    // The penalized problem still validates (hinge-of-affine stays convex
    // isotone and the stacked majorants inherit their parts' contracts).
    CHECK(validate_problem(pen, 40, 5).all_passed());
}

TEST_CASE("penalization rejects mismatched feasible sets and distributions") {
    const CompoundProblem obj = deterministic_scalar(
        [](double x, double xi) { return xi * x; }, [](double, double xi) { return xi; },
        FeasibleSet::interval(0.0, 2.0));
    CompoundProblem con = deterministic_scalar(
        [](double x, double xi) { return 0.5 * xi * x - 1.0; },
        [](double, double xi) { return 0.5 * xi; }, FeasibleSet::interval(0.0, 3.0));
    CHECK_THROWS_WITH_AS(penalize_constraints(obj, {con}, 10.0),
                         doctest::Contains("feasible set"), std::invalid_argument);

    con.X = FeasibleSet::interval(0.0, 2.0);
    con.xi_dist = DistributionSpec::empirical({{3.0}});
    CHECK_THROWS_WITH_AS(penalize_constraints(obj, {con}, 10.0),
                         doctest::Contains("distribution"), std::invalid_argument);

    con.xi_dist = DistributionSpec::empirical({{2.0}});
    CHECK_THROWS_AS(penalize_constraints(obj, {con}, 0.0), std::invalid_argument);
}
