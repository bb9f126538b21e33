#include <cmath>
#include <functional>
#include <stdexcept>

#include "doctest.h"
#include "smm/rng.hpp"
#include "smm/subsolver.hpp"
#include "test_util.hpp"

using namespace smm;

namespace {

// A one-sample model whose surrogate value is exactly f(x) (scalar x), with
// the prox term attached: solve_prox then minimizes f(x) + (1/(2 rho))(x-c)^2.
SurrogateModel scalar_model(const CompoundProblem& p, double center, double rho) {
    SampleBatch xi;
    xi.rows = {{0.0}};
    SurrogateModel m = build_surrogate_model(p, p.X.project({center}), xi, {});
    set_prox(m, {center}, rho);
    return m;
}

CompoundProblem scalar_problem(std::function<double(double)> f, std::function<double(double)> df,
                               FeasibleSet X) {
    CompoundProblem p;
    p.outer = testutil::outer1(testutil::affine({1.0}));
    p.G = RandomFn::smooth(
        1,
        testutil::scalar_fn([f](const Vec& x, const Vec&) { return f(x[0]); },
                            [df](const Vec& x, const Vec&) { return Vec{df(x[0])}; }),
        0.0);
    p.F = RandomFn::none();
    p.X = std::move(X);
    p.xi_dist = DistributionSpec::empirical({{0.0}});
    return p;
}

}  // namespace

TEST_CASE("an interior smooth prox point is found and certified") {
    // (x-3)^2 + (1/2)(x-1)^2 has its minimum at x = 7/3 inside [0,3].
    const CompoundProblem p = scalar_problem([](double x) { return (x - 3.0) * (x - 3.0); },
                                             [](double x) { return 2.0 * (x - 3.0); },
                                             FeasibleSet::interval(0.0, 3.0));
    const SurrogateModel m = scalar_model(p, 1.0, 1.0);
    const auto res = solve_prox(m, p.X, SubsolverConfig{}, 1e-10, {1.0});
    CHECK(res.certified);
    CHECK(res.certified_gap <= 1e-10);
    CHECK(res.x_out[0] == doctest::Approx(7.0 / 3.0).epsilon(1e-5));
    CHECK(res.value == doctest::Approx(4.0 / 3.0).epsilon(1e-8));
    CHECK(res.iters_used < SubsolverConfig{}.max_iters);
}

TEST_CASE("an active bound moves the prox point to the boundary") {
    const CompoundProblem p = scalar_problem([](double x) { return (x - 3.0) * (x - 3.0); },
                                             [](double x) { return 2.0 * (x - 3.0); },
                                             FeasibleSet::interval(-2.0, 2.0));
    const SurrogateModel m = scalar_model(p, 1.0, 1.0);
    const auto res = solve_prox(m, p.X, SubsolverConfig{}, 1e-10, {1.0});
    CHECK(res.certified);
    CHECK(res.x_out[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("a kink at the optimum is solved by value even though the residual cannot certify") {
    // |x| + (1/2)(x - 1/2)^2 is minimized exactly at the kink x = 0, where
    // the one-sided subgradient keeps the fixed-point residual large.
    const CompoundProblem p = scalar_problem(
        [](double x) { return std::fabs(x); },
        [](double x) { return testutil::abs_subgrad(x); }, FeasibleSet::interval(-1.0, 1.0));
    const SurrogateModel m = scalar_model(p, 0.5, 1.0);
    const auto res = solve_prox(m, p.X, SubsolverConfig{}, 1e-8, {0.5});
    CHECK(!res.certified);
    CHECK(std::fabs(res.x_out[0]) <= 1e-6);
    CHECK(res.value == doctest::Approx(0.125).epsilon(1e-9));
    // The fallback gap estimate is still informative.
    CHECK(res.certified_gap < 0.05);
}

TEST_CASE("a steep linear objective with a large prox radius rides to the boundary") {
    const CompoundProblem q = scalar_problem([](double x) { return -x; }, [](double) { return -1.0; },
                                             FeasibleSet::interval(0.0, 1.0));
    const SurrogateModel m = scalar_model(q, 0.0, 100.0);
    const auto res = solve_prox(m, q.X, SubsolverConfig{}, 1e-9, {0.0});
    CHECK(res.certified);
    CHECK(res.x_out[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(res.value == doctest::Approx(-1.0 + 0.005).epsilon(1e-8));
}

TEST_CASE("the result never exceeds the warm-start value") {
    Rng r(31);
    for (int trial = 0; trial < 25; ++trial) {
        const double a = 2.0 * r.next_gauss();
        const double b = r.next_gauss();
        const CompoundProblem p = scalar_problem(
            [a, b](double x) { return std::fabs(x - a) + b * x; },
            [a, b](double x) { return testutil::abs_subgrad(x - a) + b; },
            FeasibleSet::interval(-3.0, 3.0));
        const double center = 2.0 * r.next_gauss();
        SurrogateModel m = scalar_model(p, center, 0.5 + r.next_unit());
        SubsolverConfig tight;
        tight.max_iters = 120;  // starve the solver: the contract must still hold
        const Vec start = p.X.project({center});
        const double warm = surrogate_value(m, start);
        const auto res = solve_prox(m, p.X, tight, 1e-12, start);
        CHECK(res.value <= warm + 1e-12);
        CHECK(res.value == doctest::Approx(surrogate_value(m, res.x_out)).epsilon(1e-12));
        // x_out is feasible (projection fixed point).
        CHECK(dist(res.x_out, p.X.project(res.x_out)) <= 1e-12);
    }
}

TEST_CASE("a five-dimensional smooth model certifies a tight gap") {
    const Vec a{0.3, -0.2, 0.1, 0.6, -0.5};
    CompoundProblem p;
    p.outer = testutil::outer1(testutil::affine({1.0}));
    p.G = RandomFn::smooth(
        1,
        testutil::scalar_fn([a](const Vec& x, const Vec&) { return dist_sq(x, a); },
                            [a](const Vec& x, const Vec&) {
                                Vec g(x.size());
                                for (std::size_t i = 0; i < x.size(); ++i)
                                    g[i] = 2.0 * (x[i] - a[i]);
                                return g;
                            }),
        0.0);
    p.F = RandomFn::none();
    p.X = FeasibleSet::box(Vec(5, -1.0), Vec(5, 1.0));
    p.xi_dist = DistributionSpec::empirical({{0.0}});
    SampleBatch xi;
    xi.rows = {{0.0}};
    SurrogateModel m = build_surrogate_model(p, Vec(5, 0.0), xi, {});
    set_prox(m, Vec(5, 0.0), 2.0);

    const auto res = solve_prox(m, p.X, SubsolverConfig{}, 1e-8, Vec(5, 0.0));
    CHECK(res.certified);
    CHECK(res.certified_gap <= 1e-8);
    // Minimizer of ||x-a||^2 + (1/4)||x||^2 is 0.8 a.
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(res.x_out[i] == doctest::Approx(0.8 * a[i]).epsilon(1e-4));
}

namespace {

CompoundProblem kinked_compound() {
    // G = x^2 - max(x, -x) with explicit piece structure.
    CompoundProblem p;
    p.outer = testutil::outer1(testutil::affine({1.0}));
    p.G = RandomFn::dc_max_smooth(
        1,
        testutil::scalar_fn([](const Vec& x, const Vec&) { return x[0] * x[0]; },
                            [](const Vec& x, const Vec&) { return Vec{2.0 * x[0]}; }),
        {{SmoothPiece{[](const Vec& x) { return x[0]; }, [](const Vec&) { return Vec{1.0}; }},
          SmoothPiece{[](const Vec& x) { return -x[0]; }, [](const Vec&) { return Vec{-1.0}; }}}},
        0.0);
    p.F = RandomFn::none();
    p.X = FeasibleSet::interval(-2.0, 2.0);
    p.xi_dist = DistributionSpec::empirical({{0.0}});
    return p;
}

}  // namespace

TEST_CASE("the enumerated solver picks the better piece model and breaks ties low") {
    const CompoundProblem p = kinked_compound();
    SampleBatch xi;
    xi.rows = {{0.0}};
    // Two single-piece models anchored at the kink: x^2 - x and x^2 + x.
    SurrogateModel m0 = build_surrogate_model(p, {0.0}, xi, {}, {0}, {});
    SurrogateModel m1 = build_surrogate_model(p, {0.0}, xi, {}, {1}, {});

    SUBCASE("asymmetric prox center selects the matching piece") {
        set_prox(m0, {-0.5}, 1.0);
        set_prox(m1, {-0.5}, 1.0);
        const auto res =
            solve_prox_enumerated({m0, m1}, p.X, SubsolverConfig{}, 1e-9, {-0.5});
        CHECK(res.winning_tuple == 1);
        CHECK(res.x_out[0] == doctest::Approx(-0.5).epsilon(1e-5));
        CHECK(res.value == doctest::Approx(-0.25).epsilon(1e-7));
    }
    SUBCASE("a symmetric center ties and the lowest index wins") {
        set_prox(m0, {0.0}, 1.0);
        set_prox(m1, {0.0}, 1.0);
        const auto res = solve_prox_enumerated({m0, m1}, p.X, SubsolverConfig{}, 1e-9, {0.0});
        CHECK(res.winning_tuple == 0);
        CHECK(res.x_out[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
        CHECK(res.value == doctest::Approx(-1.0 / 6.0).epsilon(1e-7));
    }
}

TEST_CASE("subsolver input validation") {
    const CompoundProblem p = kinked_compound();
    SampleBatch xi;
    xi.rows = {{0.0}};
    SurrogateModel no_prox = build_surrogate_model(p, {0.0}, xi, {});
    CHECK_THROWS_AS(solve_prox(no_prox, p.X, SubsolverConfig{}, 1e-6, {0.0}),
                    std::invalid_argument);
    SurrogateModel m = build_surrogate_model(p, {0.0}, xi, {});
    set_prox(m, {0.0}, 1.0);
    CHECK_THROWS_AS(solve_prox(m, p.X, SubsolverConfig{}, 0.0, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_prox_enumerated({}, p.X, SubsolverConfig{}, 1e-6, {0.0}),
                    std::invalid_argument);
}

TEST_CASE("the argmin drift of a strongly convex function under bounded error") {
    // If f is zeta-strongly convex and sup |f - g| <= eta, the minimizers are
    // within 2 sqrt(eta / zeta).  Checked on a fine grid over 100 random
    // quadratic-plus-bounded-wiggle instances; the grid step enters as slack.
    Rng r(77);
    const int grid = 4000;
    const double lo = -2.0, hi = 2.0;
    const double step = (hi - lo) / grid;
    for (int trial = 0; trial < 100; ++trial) {
        const double zeta = 0.5 + 4.0 * r.next_unit();
        const double a = -1.0 + 2.0 * r.next_unit();
        const double amp = 0.001 + 0.05 * r.next_unit();
        const double freq = 1.0 + 20.0 * r.next_unit();
        const double phase = 6.28 * r.next_unit();
        auto f = [&](double x) { return 0.5 * zeta * (x - a) * (x - a); };
        auto g = [&](double x) { return f(x) + amp * std::sin(freq * x + phase); };

        double xf = lo, xg = lo, vf = f(lo), vg = g(lo), eta = 0.0;
        for (int i = 0; i <= grid; ++i) {
            const double x = lo + i * step;
            if (f(x) < vf) {
                vf = f(x);
                xf = x;
            }
            if (g(x) < vg) {
                vg = g(x);
                xg = x;
            }
            eta = std::max(eta, std::fabs(f(x) - g(x)));
        }
        const double bound = 2.0 * std::sqrt(eta / zeta);
        CHECK(std::fabs(xf - xg) <= bound + 2.0 * step);
    }
}
