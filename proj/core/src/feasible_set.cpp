#include "smm/feasible_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace smm {

namespace {

double box_diameter(const BoxSet& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.lo.size(); ++i) {
        const double d = b.hi[i] - b.lo[i];
        s += d * d;
    }
    return std::sqrt(s);
}

void check_dim(int expected, const Vec& y) {
    if (static_cast<int>(y.size()) != expected)
        throw std::invalid_argument("projection input dimension mismatch");
}

}  // namespace

FeasibleSet::FeasibleSet(BoxSet b) : kind_(std::move(b)) {
    const auto& box = std::get<BoxSet>(kind_);
    if (box.lo.size() != box.hi.size() || box.lo.empty())
        throw std::invalid_argument("box bounds must be nonempty and of equal dimension");
    for (std::size_t i = 0; i < box.lo.size(); ++i)
        if (box.lo[i] > box.hi[i]) throw std::invalid_argument("box has lo > hi");
    dim_ = static_cast<int>(box.lo.size());
    diameter_ = box_diameter(box);
}

FeasibleSet::FeasibleSet(SimplexSet s) : kind_(s) {
    if (s.dim < 1) throw std::invalid_argument("simplex dimension must be positive");
    if (s.radius <= 0.0) throw std::invalid_argument("simplex radius must be positive");
    dim_ = s.dim;
    // Largest pairwise distance is between two vertices: radius * sqrt(2).
    diameter_ = s.dim == 1 ? 0.0 : s.radius * std::sqrt(2.0);
}

FeasibleSet::FeasibleSet(BallSet b) : kind_(std::move(b)) {
    const auto& ball = std::get<BallSet>(kind_);
    if (ball.center.empty()) throw std::invalid_argument("ball center must be nonempty");
    if (ball.radius <= 0.0) throw std::invalid_argument("ball radius must be positive");
    dim_ = static_cast<int>(ball.center.size());
    diameter_ = 2.0 * ball.radius;
}

FeasibleSet::FeasibleSet(CustomSet c) : kind_(std::move(c)) {
    const auto& cu = std::get<CustomSet>(kind_);
    if (cu.dim < 1) throw std::invalid_argument("custom set dimension must be positive");
    if (!cu.projection) throw std::invalid_argument("custom set needs a projection oracle");
    if (!(cu.diameter >= 0.0) || !std::isfinite(cu.diameter))
        throw std::invalid_argument("custom set needs a finite diameter bound");
    dim_ = cu.dim;
    diameter_ = cu.diameter;
}

FeasibleSet FeasibleSet::box(Vec lo, Vec hi) { return FeasibleSet(BoxSet{std::move(lo), std::move(hi)}); }

FeasibleSet FeasibleSet::interval(double lo, double hi) { return box(Vec{lo}, Vec{hi}); }

FeasibleSet FeasibleSet::simplex(int dim, double radius) { return FeasibleSet(SimplexSet{dim, radius}); }

FeasibleSet FeasibleSet::ball(Vec center, double radius) {
    return FeasibleSet(BallSet{std::move(center), radius});
}

FeasibleSet FeasibleSet::custom(int dim, std::function<Vec(const Vec&)> projection,
                                double diameter) {
    return FeasibleSet(CustomSet{dim, std::move(projection), diameter});
}

FeasibleSet FeasibleSet::product(const FeasibleSet& a, const FeasibleSet& b) {
    const int da = a.dim(), db = b.dim();
    const double diam = std::sqrt(a.diameter() * a.diameter() + b.diameter() * b.diameter());
    auto proj = [a, b, da, db](const Vec& y) {
        Vec ya(y.begin(), y.begin() + da);
        Vec yb(y.begin() + da, y.begin() + da + db);
        Vec pa = a.project(ya);
        Vec pb = b.project(yb);
        return concat(pa, pb);
    };
    return custom(da + db, std::move(proj), diam);
}

Vec project_simplex(const Vec& y, double radius) {
    const std::size_t n = y.size();
    Vec u = y;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0;
    double theta = 0.0;
    std::size_t rho = 0;
    for (std::size_t j = 0; j < n; ++j) {
        cum += u[j];
        const double t = (cum - radius) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            rho = j + 1;
            theta = t;
        }
    }
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::max(y[i] - theta, 0.0);
    (void)rho;
    return x;
}

Vec FeasibleSet::project(const Vec& y) const {
    check_dim(dim_, y);
    struct Visitor {
        const Vec& y;
        Vec operator()(const BoxSet& b) const {
            Vec x(y.size());
            for (std::size_t i = 0; i < y.size(); ++i)
                x[i] = std::min(std::max(y[i], b.lo[i]), b.hi[i]);
            return x;
        }
        Vec operator()(const SimplexSet& s) const { return project_simplex(y, s.radius); }
        Vec operator()(const BallSet& b) const {
            Vec d = sub(y, b.center);
            const double r = norm(d);
            if (r <= b.radius) return y;
            return add(b.center, scaled(d, b.radius / r));
        }
        Vec operator()(const CustomSet& c) const { return c.projection(y); }
    };
    return std::visit(Visitor{y}, kind_);
}

Vec FeasibleSet::some_point() const { return project(Vec(static_cast<std::size_t>(dim_), 0.0)); }

Vec project(const FeasibleSet& set, const Vec& y) { return set.project(y); }

}  // namespace smm
