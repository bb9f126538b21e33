#pragma once

#include <functional>
#include <variant>

#include "smm/vec.hpp"

namespace smm {

/// Axis-aligned box {x : lo <= x <= hi}.
struct BoxSet {
    Vec lo, hi;
};

/// Scaled standard simplex {x >= 0 : sum x_i = radius}.
struct SimplexSet {
    int dim = 0;
    double radius = 1.0;
};

/// Euclidean ball of given center and radius.
struct BallSet {
    Vec center;
    double radius = 1.0;
};

/// User-supplied set: an exact Euclidean projection oracle plus the set
/// dimension and a finite diameter bound.
struct CustomSet {
    int dim = 0;
    std::function<Vec(const Vec&)> projection;
    double diameter = 0.0;
};

/// A nonempty convex compact feasible set with an exact Euclidean projection.
///
/// Box and ball projections are closed-form; the simplex projection uses the
/// exact sort-and-threshold rule.  Products of sets project componentwise and
/// are represented as Custom sets built by `product`.
class FeasibleSet {
public:
    FeasibleSet() : kind_(BoxSet{{0.0}, {1.0}}) {}
    explicit FeasibleSet(BoxSet b);
    explicit FeasibleSet(SimplexSet s);
    explicit FeasibleSet(BallSet b);
    explicit FeasibleSet(CustomSet c);

    static FeasibleSet box(Vec lo, Vec hi);
    static FeasibleSet interval(double lo, double hi);  ///< 1-D box
    static FeasibleSet simplex(int dim, double radius = 1.0);
    static FeasibleSet ball(Vec center, double radius);
    static FeasibleSet custom(int dim, std::function<Vec(const Vec&)> projection,
                              double diameter);

    /// Cartesian product; projects each factor independently.
    static FeasibleSet product(const FeasibleSet& a, const FeasibleSet& b);

    int dim() const { return dim_; }

    /// Euclidean projection onto the set.
    Vec project(const Vec& y) const;

    /// Finite diameter (exact for box/simplex/ball; user-supplied bound for
    /// custom sets).
    double diameter() const { return diameter_; }

    /// An arbitrary feasible point (projection of the origin).
    Vec some_point() const;

    const std::variant<BoxSet, SimplexSet, BallSet, CustomSet>& kind() const { return kind_; }

private:
    std::variant<BoxSet, SimplexSet, BallSet, CustomSet> kind_;
    int dim_ = 1;
    double diameter_ = 1.0;
};

/// Exact Euclidean projection onto {x >= 0 : sum x_i = radius} by the
/// sort-and-threshold rule.
Vec project_simplex(const Vec& y, double radius);

/// Euclidean projection onto `set` (free-function form).
Vec project(const FeasibleSet& set, const Vec& y);

}  // namespace smm
