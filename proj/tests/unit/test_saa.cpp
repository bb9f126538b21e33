#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "smm/saa.hpp"
#include "test_util.hpp"

using namespace smm;

namespace {

// psi = id, phi = [u1 + u2]_+, G = x * xi, F = -eta: the compound value is
// [x*xi_bar ... ]_+ averaged per xi sample with the eta mean shared.
CompoundProblem hinge_compound() {
    CompoundProblem p;
    p.outer = testutil::outer1(testutil::hinge({1.0, 1.0}));
    p.G = RandomFn::smooth(
        1,
        testutil::scalar_fn([](const Vec& x, const Vec& xi) { return x[0] * xi[0]; },
                            [](const Vec&, const Vec& xi) { return Vec{xi[0]}; }),
        0.0);
    p.F = RandomFn::smooth(1,
                           testutil::scalar_fn([](const Vec&, const Vec& eta) { return -eta[0]; },
                                               [](const Vec&, const Vec&) { return Vec{0.0}; }),
                           0.0);
    p.X = FeasibleSet::interval(0.0, 5.0);
    p.xi_dist = DistributionSpec::gaussian({0.0}, {1.0});
    return p;
}

SampleBatch rows(std::vector<Vec> r) {
    SampleBatch b;
    b.rows = std::move(r);
    return b;
}

}  // namespace

TEST_CASE("the sample-average value matches hand computation") {
    const CompoundProblem p = hinge_compound();
    const SampleBatch xi = rows({{1.0}, {2.0}});
    const SampleBatch eta = rows({{3.0}, {5.0}});
    // fbar = mean(-3, -5) = -4; u = (2, -4) and (4, -4); both hinges clamp
    // to 0, so the average is 0.
    CHECK(saa_objective(p, xi, eta, {2.0}) == doctest::Approx(0.0));
    // At x = 3: hinges give 0 and [6 - 4]_+ = 2; average 1.
    CHECK(saa_objective(p, xi, eta, {3.0}) == doctest::Approx(1.0));
    // Single-sample batches reduce to a plain composition.
    CHECK(saa_objective(p, rows({{2.0}}), rows({{3.0}}), {2.0}) == doctest::Approx(1.0));
}

TEST_CASE("consumed batches must be nonempty") {
    const CompoundProblem p = hinge_compound();
    const SampleBatch some = rows({{1.0}});
    CHECK_THROWS_WITH_AS(saa_objective(p, {}, some, {1.0}), doctest::Contains("xi batch"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(saa_objective(p, some, {}, {1.0}), doctest::Contains("eta batch"),
                         std::invalid_argument);

    CompoundProblem g_only = hinge_compound();
    g_only.F = RandomFn::none();
    g_only.outer = testutil::outer1(testutil::hinge({1.0}));
    CHECK_NOTHROW(saa_objective(g_only, some, {}, {1.0}));
}

TEST_CASE("rate experiment input validation") {
    const CompoundProblem p = hinge_compound();
    CHECK_THROWS_AS(saa_rate_experiment(p, {1.0}, 0.0, {100}, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(saa_rate_experiment(p, {1.0}, 0.0, {100, 200}, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(saa_rate_experiment(p, {1.0}, 0.0, {100, 0}, 4, 1), std::invalid_argument);
}

TEST_CASE("a deterministic integrand is flagged exact") {
    CompoundProblem p;
    p.outer = testutil::outer1(testutil::affine({1.0}));
    p.G = RandomFn::smooth(1,
                           testutil::scalar_fn([](const Vec& x, const Vec&) { return 3.0 * x[0]; },
                                               [](const Vec&, const Vec&) { return Vec{3.0}; }),
                           0.0);
    p.F = RandomFn::none();
    p.X = FeasibleSet::interval(0.0, 2.0);
    p.xi_dist = DistributionSpec::gaussian({0.0}, {1.0});
    const auto res = saa_rate_experiment(p, {1.0}, 3.0, {10, 100}, 4, 9);
    CHECK(res.exact);
    CHECK(!res.slope_defined);
    CHECK(res.high_variance);  // 4 trials is below the stability threshold
    for (const auto& row : res.rows) CHECK(row.mean_abs_error == 0.0);
}

TEST_CASE("the sampling error of a Gaussian positive part decays near N^{-1/2}") {
    // Theta(x) = E[ -xi ]_+ at any x; the true value is the half-normal mean
    // 1/sqrt(2*pi), computed independently by quadrature.
    CompoundProblem p;
    p.outer = testutil::outer1(testutil::hinge({1.0}));
    p.G = RandomFn::smooth(1,
                           testutil::scalar_fn([](const Vec&, const Vec& xi) { return -xi[0]; },
                                               [](const Vec&, const Vec&) { return Vec{0.0}; }),
                           0.0);
    p.F = RandomFn::none();
    p.X = FeasibleSet::interval(0.0, 1.0);
    p.xi_dist = DistributionSpec::gaussian({0.0}, {1.0});

    const double theta_true = testutil::quad_expected_neg_part_gauss();
    CHECK(theta_true == doctest::Approx(1.0 / std::sqrt(2.0 * std::acos(-1.0))).epsilon(1e-6));

    const auto res = saa_rate_experiment(p, {0.5}, theta_true, {100, 1000, 10000}, 40, 17);
    REQUIRE(res.slope_defined);
    CHECK(!res.exact);
    CHECK(!res.high_variance);
    CHECK(res.slope > -0.8);
    CHECK(res.slope < -0.25);
    CHECK(res.rows[0].mean_abs_error > res.rows[2].mean_abs_error);
}
