#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "smm/feasible_set.hpp"
#include "smm/rng.hpp"
#include "test_util.hpp"

using namespace smm;

TEST_CASE("box projection clamps componentwise") {
    auto X = FeasibleSet::box({0.0, 0.0}, {1.0, 1.0});
    CHECK(X.project({-1.0, 0.5}) == Vec{0.0, 0.5});
    CHECK(X.project({2.0, -3.0}) == Vec{1.0, 0.0});
    CHECK(X.diameter() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("ball projection scales radially") {
    auto X = FeasibleSet::ball({0.0, 0.0}, 1.0);
    const Vec p = X.project({3.0, 4.0});
    CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(X.project({0.1, 0.2}) == Vec{0.1, 0.2});  // interior untouched
    CHECK(X.diameter() == doctest::Approx(2.0));
}

TEST_CASE("simplex projection matches the grid reference on the 3-point example") {
    const Vec y{0.5, 0.5, 2.0};
    const Vec p = project_simplex(y, 1.0);
    CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(1.0).epsilon(1e-12));
    // Independent check: a dense barycentric grid cannot beat the closed form.
    const Vec g = testutil::simplex3_grid_projection(y, 1.0, 400);
    CHECK(dist_sq(p, y) <= dist_sq(g, y) + 1e-9);
    CHECK(dist(p, g) < 5e-3);
}

TEST_CASE("simplex projection satisfies the projection optimality conditions") {
    Rng r(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + r.next_index(6);
        Vec y(d);
        for (auto& v : y) v = 4.0 * r.next_gauss();
        const double radius = 0.5 + 2.0 * r.next_unit();
        const Vec x = project_simplex(y, radius);
        CHECK(testutil::simplex_projection_kkt_ok(y, x, radius));
    }
}

TEST_CASE("projections are idempotent and nonexpansive") {
    Rng r(23);
    const FeasibleSet sets[] = {
        FeasibleSet::box({-1.0, 0.0, 2.0}, {1.0, 3.0, 5.0}),
        FeasibleSet::simplex(3, 2.0),
        FeasibleSet::ball({1.0, -1.0, 0.0}, 1.5),
        FeasibleSet::product(FeasibleSet::interval(-1.0, 1.0), FeasibleSet::simplex(2, 1.0)),
    };
    for (const auto& X : sets) {
        for (int trial = 0; trial < 1000; ++trial) {
            Vec y(static_cast<std::size_t>(X.dim())), z(static_cast<std::size_t>(X.dim()));
            for (auto& v : y) v = 5.0 * r.next_gauss();
            for (auto& v : z) v = 5.0 * r.next_gauss();
            const Vec py = X.project(y);
            const Vec pz = X.project(z);
            CHECK(dist(py, X.project(py)) <= 1e-12);
            CHECK(dist(py, pz) <= dist(y, z) + 1e-12);
        }
    }
}

TEST_CASE("product sets project blockwise and give a feasible point") {
    auto X = FeasibleSet::product(FeasibleSet::interval(0.0, 1.0), FeasibleSet::simplex(2, 1.0));
    CHECK(X.dim() == 3);
    const Vec p = X.project({5.0, 2.0, -1.0});
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] + p[2] == doctest::Approx(1.0));
    const Vec s = X.some_point();
    CHECK(dist(s, X.project(s)) <= 1e-12);
    CHECK(X.diameter() == doctest::Approx(std::sqrt(1.0 + 2.0)));
}

TEST_CASE("degenerate and invalid set parameters are rejected") {
    CHECK_THROWS_AS(FeasibleSet::box({0.0}, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(FeasibleSet::simplex(0), std::invalid_argument);
    CHECK_THROWS_AS(FeasibleSet::ball({0.0}, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(FeasibleSet::box({0.0}, {1.0}).project({0.0, 0.0}), std::invalid_argument);
}
