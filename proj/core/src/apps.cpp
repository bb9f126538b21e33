#include "smm/apps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <variant>

namespace smm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec head(const Vec& z, int n) { return Vec(z.begin(), z.begin() + n); }

// Pad an n-dim gradient over x into total-dim z-space (zeros elsewhere).
Vec pad(const Vec& gx, int total) {
    Vec g(static_cast<std::size_t>(total), 0.0);
    std::copy(gx.begin(), gx.end(), g.begin());
    return g;
}

// Per-sample nonnegative weight; empty means 1.
using ScaleFn = std::function<double(const Vec& xi)>;

// A scalar loss term u(x, xi) viewed from the lifted variable z: the oracle
// consumes the first n coordinates of z, and optionally a slice of the
// sample row.
struct InnerLoss {
    RandomVectorOracle o;
    int n = 0;
    int xi_off = 0;
    int xi_len = -1;  // -1: pass the whole row

    Vec slice(const Vec& xi) const {
        if (xi_len < 0) return xi;
        return Vec(xi.begin() + xi_off, xi.begin() + xi_off + xi_len);
    }
    double val(const Vec& z, const Vec& xi) const {
        return o.eval(head(z, n), slice(xi))[0];
    }
    Vec grad_x(const Vec& z, const Vec& xi) const {
        return o.subgrad(head(z, n), slice(xi), 0);
    }
};

// Convex part of the product split of  scale * (a*u + lin*a + cst)  with
// a = z[slot] and u affine in x:
//   q(z, xi) = scale * (0.5*(a + sgn*u)^2 + lin*a + cst).
RandomVectorOracle product_g(InnerLoss u, int total, int slot, double sgn,
                             double lin, double cst, ScaleFn scale) {
    auto s_of = [scale](const Vec& xi) { return scale ? scale(xi) : 1.0; };
    RandomVectorOracle o;
    o.eval = [u, slot, sgn, lin, cst, s_of](const Vec& z, const Vec& xi) {
        const double a = z[static_cast<std::size_t>(slot)];
        const double t = a + sgn * u.val(z, xi);
        return Vec{s_of(xi) * (0.5 * t * t + lin * a + cst)};
    };
    o.subgrad = [u, total, slot, sgn, lin, s_of](const Vec& z, const Vec& xi, int) {
        const double a = z[static_cast<std::size_t>(slot)];
        const double t = a + sgn * u.val(z, xi);
        const double s = s_of(xi);
        Vec gx = u.grad_x(z, xi);
        Vec g = pad(gx, total);
        for (double& v : g) v *= s * t * sgn;
        g[static_cast<std::size_t>(slot)] += s * (t + lin);
        return g;
    };
    return o;
}

// Concave-side part of the same split:  q(z, xi) = scale * 0.5*(a^2 + u^2).
RandomVectorOracle product_h(InnerLoss u, int total, int slot, ScaleFn scale) {
    auto s_of = [scale](const Vec& xi) { return scale ? scale(xi) : 1.0; };
    RandomVectorOracle o;
    o.eval = [u, slot, s_of](const Vec& z, const Vec& xi) {
        const double a = z[static_cast<std::size_t>(slot)];
        const double v = u.val(z, xi);
        return Vec{s_of(xi) * 0.5 * (a * a + v * v)};
    };
    o.subgrad = [u, total, slot, s_of](const Vec& z, const Vec& xi, int) {
        const double a = z[static_cast<std::size_t>(slot)];
        const double v = u.val(z, xi);
        const double s = s_of(xi);
        Vec g = pad(u.grad_x(z, xi), total);
        for (double& t : g) t *= s * v;
        g[static_cast<std::size_t>(slot)] += s * a;
        return g;
    };
    return o;
}

// Lift an x-only 1-D oracle into z-space and apply an affine frame:
//   q(z, xi) = s * o(x, xi) + lin * z[slot] + cst.
RandomVectorOracle lift_affine(RandomVectorOracle o, int n, int total, double s,
                               int slot, double lin, double cst) {
    RandomVectorOracle r;
    r.eval = [o, n, s, slot, lin, cst](const Vec& z, const Vec& xi) {
        double v = s * o.eval(head(z, n), xi)[0] + cst;
        if (lin != 0.0) v += lin * z[static_cast<std::size_t>(slot)];
        return Vec{v};
    };
    r.subgrad = [o, n, total, s, slot, lin](const Vec& z, const Vec& xi, int) {
        Vec g = pad(o.subgrad(head(z, n), xi, 0), total);
        for (double& t : g) t *= s;
        if (lin != 0.0) g[static_cast<std::size_t>(slot)] += lin;
        return g;
    };
    return r;
}

// Lift a 1-D loss into z-space with an added shift variable:
//   sign * f(x, xi) + eta_coeff * z[n].
// Smooth losses keep their curvature bound; DC losses keep it on the concave
// side when the sign is positive and lose it (undeclared) when negation
// swaps the roles of the two parts.
RandomFn lift_loss_with_shift(const RandomFn& f, int n, int total, double sign,
                              double eta_coeff) {
    if (const auto* sm = std::get_if<SmoothTag>(&f.structure)) {
        return RandomFn::smooth(
            1, lift_affine(f.fn, n, total, sign, n, eta_coeff, 0.0), sm->kappa0);
    }
    if (const auto* dc = std::get_if<DcSmoothTag>(&f.structure)) {
        if (sign > 0.0) {
            return RandomFn::dc_smooth(
                1, lift_affine(dc->g, n, total, 1.0, n, eta_coeff, 0.0),
                lift_affine(dc->h, n, total, 1.0, n, 0.0, 0.0), dc->kappa0);
        }
        // -(g - h) = h - g: the new concave side is g, whose curvature the
        // tag does not bound.
        return RandomFn::dc_smooth(
            1, lift_affine(dc->h, n, total, 1.0, n, eta_coeff, 0.0),
            lift_affine(dc->g, n, total, 1.0, n, 0.0, 0.0), kNaN);
    }
    throw std::invalid_argument(
        "loss structure not supported by this builder (smooth or dc required)");
}

// Feasible probe points: a base point plus diameter-sized pushes along each
// coordinate, projected back onto the set.
std::vector<Vec> probe_points(const FeasibleSet& X) {
    std::vector<Vec> ps;
    const Vec x0 = X.some_point();
    ps.push_back(x0);
    double D = X.diameter();
    if (!(D > 0.0) || !std::isfinite(D)) D = 1.0;
    for (int i = 0; i < X.dim(); ++i) {
        Vec e = x0;
        e[static_cast<std::size_t>(i)] += D;
        ps.push_back(X.project(e));
        e = x0;
        e[static_cast<std::size_t>(i)] -= D;
        ps.push_back(X.project(e));
    }
    return ps;
}

// Evaluate the loss on every pilot row at a fixed decision.
std::vector<double> pilot_values(const LossSpec& loss, const Vec& x,
                                 const SampleBatch& pilot) {
    std::vector<double> vals;
    vals.reserve(pilot.size());
    for (const Vec& row : pilot.rows) vals.push_back(loss.fn.fn.eval(x, row)[0]);
    return vals;
}

// Upper bound for one lifted scale variable: the upper endpoint of the
// optimal-scale interval of the pilot distribution at threshold tau.  When
// the interval degenerates (threshold at or above the support, or all mass
// below it) fall back to the breakpoint ladder and record a warning for the
// cases that violate the threshold-feasibility precondition.
double lifted_cap(const EmpiricalRV& Z, double tau, bool& warning) {
    const BpoeResult r = bpoe(Z, tau);
    double base;
    if (r.unbounded_a || r.at_sup_limit) {
        warning = true;
        base = tau > Z.min_value() ? 1.0 / (tau - Z.min_value()) : 1.0;
    } else if (r.a_hi > 0.0 && std::isfinite(r.a_hi)) {
        base = r.a_hi;
    } else {
        base = Z.max_value() > tau ? 1.0 / (Z.max_value() - tau) : 1.0;
    }
    return std::max(base, 1e-3);
}

// phi(y) = [y_0 + ... + y_{m-1}]_+ with the zero piece reported at the kink.
ScalarOracle hinge_sum(int m) {
    ScalarOracle s;
    s.eval = [m](const Vec& y) {
        double t = 0.0;
        for (int i = 0; i < m; ++i) t += y[static_cast<std::size_t>(i)];
        return std::max(t, 0.0);
    };
    s.subgrad = [m](const Vec& y) {
        double t = 0.0;
        for (int i = 0; i < m; ++i) t += y[static_cast<std::size_t>(i)];
        Vec g(y.size(), 0.0);
        if (t > 0.0)
            for (int i = 0; i < m; ++i) g[static_cast<std::size_t>(i)] = 1.0;
        return g;
    };
    return s;
}

// phi_c(y) = [y_c]_+ acting on one coordinate of the inner vector.
ScalarOracle coordinate_hinge(int c) {
    ScalarOracle s;
    s.eval = [c](const Vec& y) { return std::max(y[static_cast<std::size_t>(c)], 0.0); };
    s.subgrad = [c](const Vec& y) {
        Vec g(y.size(), 0.0);
        if (y[static_cast<std::size_t>(c)] > 0.0) g[static_cast<std::size_t>(c)] = 1.0;
        return g;
    };
    return s;
}

void require_affine(const LossSpec& loss, const char* builder) {
    if (!loss.is_affine)
        throw std::invalid_argument(std::string(builder) +
                                    " requires an affine loss (is_affine)");
}

void require_loss_shape(const LossSpec& loss, const FeasibleSet& X) {
    if (loss.n <= 0 || loss.fn.dim_out != 1)
        throw std::invalid_argument("loss must be a 1-D function of n >= 1 variables");
    if (X.dim() != loss.n)
        throw std::invalid_argument("feasible set dimension must match the loss");
}

}  // namespace

LossSpec LossSpec::affine_portfolio(int n) {
    if (n <= 0) throw std::invalid_argument("portfolio loss needs n >= 1 assets");
    RandomVectorOracle o;
    o.eval = [n](const Vec& x, const Vec& xi) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
            v -= x[static_cast<std::size_t>(i)] * xi[static_cast<std::size_t>(i)];
        return Vec{v};
    };
    o.subgrad = [n](const Vec&, const Vec& xi, int) {
        Vec g(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = -xi[static_cast<std::size_t>(i)];
        return g;
    };
    LossSpec spec;
    spec.n = n;
    spec.fn = RandomFn::smooth(1, std::move(o), 0.0);
    spec.is_affine = true;
    return spec;
}

BuiltProblem build_oce_deviation(const LossSpec& loss, const UtilitySpec& u,
                                 const FeasibleSet& X, const DistributionSpec& xi,
                                 const SampleBatch& pilot) {
    require_loss_shape(loss, X);
    if (pilot.empty()) throw std::invalid_argument("pilot batch must be nonempty");
    check_utility(u);

    const int n = loss.n;
    const int total = n + 1;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Vec& x : probe_points(X)) {
        const std::vector<double> vals = pilot_values(loss, x, pilot);
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        for (double v : vals) {
            lo = std::min(lo, v - mean);
            hi = std::max(hi, v - mean);
        }
    }
    const double width = hi - lo;
    if (!(width > 1e-12 * (1.0 + std::max(std::fabs(lo), std::fabs(hi)))))
        throw std::invalid_argument(
            "pilot deviation range is degenerate; cannot bound the shift variable");

    LiftedBounds bounds;
    bounds.eta_min = lo - 0.1 * width;
    bounds.eta_max = hi + 0.1 * width;
    bounds.pilot_size = static_cast<std::int64_t>(pilot.size());

    // G = (-f(x, xi), -eta), F = f(x, xi) + eta.
    RandomFn g_loss = lift_loss_with_shift(loss.fn, n, total, -1.0, 0.0);
    RandomVectorOracle neg_eta;
    neg_eta.eval = [n](const Vec& z, const Vec&) {
        return Vec{-z[static_cast<std::size_t>(n)]};
    };
    neg_eta.subgrad = [n, total](const Vec&, const Vec&, int) {
        Vec g(static_cast<std::size_t>(total), 0.0);
        g[static_cast<std::size_t>(n)] = -1.0;
        return g;
    };
    RandomFn g_eta = RandomFn::smooth(1, std::move(neg_eta), 0.0);

    CompoundProblem p;
    p.G = RandomFn::stacked({std::move(g_loss), std::move(g_eta)});
    p.F = lift_loss_with_shift(loss.fn, n, total, 1.0, 1.0);

    // phi(y1, y2, y3) = -u(-y1 - y3) + y2, nondecreasing since u is.
    const UtilitySpec uc = u;
    ScalarOracle phi;
    phi.eval = [uc](const Vec& y) { return -uc.value(-y[0] - y[2]) + y[1]; };
    phi.subgrad = [uc](const Vec& y) {
        const double d = uc.subderiv(-y[0] - y[2]);
        return Vec{d, 1.0, d};
    };
    const double span = 2.0 * (bounds.eta_max - bounds.eta_min) + 1.0;
    p.outer = identity_psi(std::move(phi), 1.0 + 2.0 * uc.subderiv(-span));

    p.X = FeasibleSet::product(X, FeasibleSet::interval(bounds.eta_min, bounds.eta_max));
    p.xi_dist = xi;
    return BuiltProblem{std::move(p), bounds};
}

BuiltProblem build_bpoe_deviation(const LossSpec& loss, double tau,
                                  const FeasibleSet& X, const DistributionSpec& xi,
                                  const SampleBatch& pilot) {
    require_loss_shape(loss, X);
    require_affine(loss, "build_bpoe_deviation");
    if (pilot.empty()) throw std::invalid_argument("pilot batch must be nonempty");
    if (!std::isfinite(tau)) throw std::invalid_argument("threshold must be finite");

    const int n = loss.n;
    const int total = n + 1;

    LiftedBounds bounds;
    bounds.pilot_size = static_cast<std::int64_t>(pilot.size());
    double cap = 0.0;
    for (const Vec& x : probe_points(X)) {
        std::vector<double> devs = pilot_values(loss, x, pilot);
        double mean = 0.0;
        for (double v : devs) mean += v;
        mean /= static_cast<double>(devs.size());
        for (double& v : devs) v -= mean;
        cap = std::max(cap, lifted_cap(EmpiricalRV::uniform(std::move(devs)), tau,
                                       bounds.pilot_warning));
    }
    bounds.a_hi = {bounds.safety * cap};

    // z = (x, a): G = a*(f - mean_f - tau) + 1 realized as the pair
    //   G = a*f(x,xi) - tau*a + 1   (per-sample part)
    //   F = -a*f(x,xi)              (its mean supplies the centering term)
    // with each bilinear product split into a difference of convex squares.
    InnerLoss u{loss.fn.fn, n, 0, -1};
    CompoundProblem p;
    p.G = RandomFn::dc_smooth(1, product_g(u, total, n, 1.0, -tau, 1.0, {}),
                              product_h(u, total, n, {}), kNaN);
    p.F = RandomFn::dc_smooth(1, product_g(u, total, n, -1.0, 0.0, 0.0, {}),
                              product_h(u, total, n, {}), kNaN);
    p.outer = identity_psi(hinge_sum(2), 1.0);
    p.X = FeasibleSet::product(X, FeasibleSet::interval(0.0, bounds.a_hi[0]));
    p.xi_dist = xi;
    return BuiltProblem{std::move(p), bounds};
}

BuiltProblem build_dr_mixed_bpoe(const LossSpec& loss,
                                 const std::vector<double>& taus,
                                 const std::vector<double>& betas,
                                 const std::vector<DistributionSpec>& components,
                                 const FeasibleSet& X,
                                 const std::vector<SampleBatch>& pilots) {
    require_loss_shape(loss, X);
    require_affine(loss, "build_dr_mixed_bpoe");
    const int J = static_cast<int>(taus.size());
    const int K = static_cast<int>(components.size());
    if (K == 0) throw std::invalid_argument("needs at least one component distribution");
    if (J == 0) throw std::invalid_argument("needs at least one threshold");
    if (betas.size() != taus.size())
        throw std::invalid_argument("needs one weight per threshold");
    for (double b : betas)
        if (!(b >= 0.0)) throw std::invalid_argument("threshold weights must be nonnegative");
    if (pilots.size() != components.size())
        throw std::invalid_argument("needs one pilot batch per component");
    const int d = components[0].dim();
    for (const DistributionSpec& c : components)
        if (c.dim() != d)
            throw std::invalid_argument("components must share a draw dimension");
    for (const SampleBatch& b : pilots)
        if (b.empty()) throw std::invalid_argument("pilot batches must be nonempty");

    const int n = loss.n;
    const int total = n + J;
    const std::vector<Vec> probes = probe_points(X);

    // Raw pilot losses per component at every probe point.
    std::vector<std::vector<EmpiricalRV>> pilot_rvs(static_cast<std::size_t>(K));
    std::int64_t pilot_min = std::numeric_limits<std::int64_t>::max();
    for (int k = 0; k < K; ++k) {
        pilot_min = std::min(pilot_min,
                             static_cast<std::int64_t>(pilots[static_cast<std::size_t>(k)].size()));
        for (const Vec& x : probes)
            pilot_rvs[static_cast<std::size_t>(k)].push_back(EmpiricalRV::uniform(
                pilot_values(loss, x, pilots[static_cast<std::size_t>(k)])));
    }

    LiftedBounds bounds;
    bounds.pilot_size = pilot_min;
    bounds.a_hi.assign(static_cast<std::size_t>(J), 0.0);
    for (int j = 0; j < J; ++j) {
        double cap = 0.0;
        for (int k = 0; k < K; ++k)
            for (const EmpiricalRV& Z : pilot_rvs[static_cast<std::size_t>(k)])
                cap = std::max(cap, lifted_cap(Z, taus[static_cast<std::size_t>(j)],
                                               bounds.pilot_warning));
        bounds.a_hi[static_cast<std::size_t>(j)] = bounds.safety * cap;
    }

    // Component k's draw occupies row slice [k*d, (k+1)*d); the stacked inner
    // function holds one split product a_j*(f(x, xi_k) - tau_j) + 1 per (k, j).
    std::vector<RandomFn> parts;
    parts.reserve(static_cast<std::size_t>(J * K));
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < J; ++j) {
            InnerLoss u{loss.fn.fn, n, k * d, d};
            parts.push_back(RandomFn::dc_smooth(
                1,
                product_g(u, total, n + j, 1.0, -taus[static_cast<std::size_t>(j)], 1.0, {}),
                product_h(u, total, n + j, {}), kNaN));
        }
    }

    CompoundProblem p;
    p.G = RandomFn::stacked(std::move(parts));
    p.F = RandomFn::none();

    std::vector<ScalarOracle> phis;
    phis.reserve(static_cast<std::size_t>(J * K));
    for (int c = 0; c < J * K; ++c) phis.push_back(coordinate_hinge(c));

    const std::vector<double> beta = betas;
    ScalarOracle psi;
    psi.eval = [J, K, beta](const Vec& y) {
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            double s = 0.0;
            for (int j = 0; j < J; ++j)
                s += beta[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(k * J + j)];
            best = std::max(best, s);
        }
        return best;
    };
    psi.subgrad = [J, K, beta](const Vec& y) {
        int kbest = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            double s = 0.0;
            for (int j = 0; j < J; ++j)
                s += beta[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(k * J + j)];
            if (s > best) {
                best = s;
                kbest = k;
            }
        }
        Vec g(y.size(), 0.0);
        for (int j = 0; j < J; ++j)
            g[static_cast<std::size_t>(kbest * J + j)] = beta[static_cast<std::size_t>(j)];
        return g;
    };
    double beta_sum = 0.0;
    for (double b : beta) beta_sum += b;
    p.outer.psi = std::move(psi);
    p.outer.phi = std::move(phis);
    p.outer.isotone = true;
    p.outer.lip_psi = std::max(beta_sum, 1.0);
    p.outer.lip_phi = 1.0;

    Vec a_lo(static_cast<std::size_t>(J), 0.0);
    p.X = FeasibleSet::product(X, FeasibleSet::box(a_lo, Vec(bounds.a_hi)));
    p.xi_dist = DistributionSpec::product(components);
    return BuiltProblem{std::move(p), bounds};
}

int pair_index(int M, int i, int j) {
    if (M < 2 || i < 0 || j < 0 || i >= M || j >= M || i == j)
        throw std::invalid_argument("pair_index needs distinct class indices in [0, M)");
    return i * (M - 1) + (j < i ? j : j - 1);
}

int classify(const Vec& stacked_weights, int M, const Vec& attrs) {
    const int d = static_cast<int>(attrs.size());
    if (M < 1 || static_cast<int>(stacked_weights.size()) < M * d)
        throw std::invalid_argument("classify needs M score vectors of the attribute dimension");
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < M; ++m) {
        double s = 0.0;
        for (int t = 0; t < d; ++t)
            s += stacked_weights[static_cast<std::size_t>(m * d + t)] *
                 attrs[static_cast<std::size_t>(t)];
        if (s > best_score) {
            best_score = s;
            best = m;
        }
    }
    return best;
}

BuiltProblem build_bpoe_multiclass(const LabeledData& data, const MulticlassSpec& spec) {
    const int M = spec.M;
    if (M < 2) throw std::invalid_argument("needs at least two classes");
    const std::size_t R = data.classes.size();
    if (R == 0 || data.attrs.size() != R)
        throw std::invalid_argument("needs one class label per attribute row");
    const int d = static_cast<int>(data.attrs[0].size());
    if (d < 1) throw std::invalid_argument("attribute rows must be nonempty");
    for (const Vec& a : data.attrs)
        if (static_cast<int>(a.size()) != d)
            throw std::invalid_argument("attribute rows must share a dimension");

    std::vector<std::int64_t> count(static_cast<std::size_t>(M), 0);
    for (int c : data.classes) {
        if (c < 0 || c >= M) throw std::invalid_argument("class index out of range");
        ++count[static_cast<std::size_t>(c)];
    }
    for (int m = 0; m < M; ++m)
        if (count[static_cast<std::size_t>(m)] == 0)
            throw std::invalid_argument("every class needs at least one row");

    const int P = M * (M - 1);
    if (static_cast<int>(spec.margins.size()) != P)
        throw std::invalid_argument("needs one margin per ordered class pair");
    if (spec.partitions.empty() || spec.group_weights.size() != spec.partitions.size())
        throw std::invalid_argument("needs one weight per pair group");
    for (double a : spec.group_weights)
        if (!(a >= 0.0)) throw std::invalid_argument("group weights must be nonnegative");
    std::vector<bool> seen(static_cast<std::size_t>(P), false);
    for (const auto& group : spec.partitions)
        for (int t : group) {
            if (t < 0 || t >= P) throw std::invalid_argument("pair index out of range");
            seen[static_cast<std::size_t>(t)] = true;
        }
    for (int t = 0; t < P; ++t)
        if (!seen[static_cast<std::size_t>(t)])
            throw std::invalid_argument("partitions must cover every ordered class pair");
    if (!(spec.weight_radius > 0.0) || !std::isfinite(spec.weight_radius))
        throw std::invalid_argument("weight radius must be positive and finite");

    // Empirical rows: class index first, then attributes.
    std::vector<Vec> rows;
    rows.reserve(R);
    for (std::size_t t = 0; t < R; ++t) {
        Vec row(static_cast<std::size_t>(1 + d));
        row[0] = static_cast<double>(data.classes[t]);
        std::copy(data.attrs[t].begin(), data.attrs[t].end(), row.begin() + 1);
        rows.push_back(std::move(row));
    }

    // Class frequencies and class-mean discriminant used as the pilot probe.
    std::vector<double> freq(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m)
        freq[static_cast<std::size_t>(m)] =
            static_cast<double>(count[static_cast<std::size_t>(m)]) / static_cast<double>(R);
    std::vector<Vec> wbar(static_cast<std::size_t>(M), Vec(static_cast<std::size_t>(d), 0.0));
    for (std::size_t t = 0; t < R; ++t)
        for (int q = 0; q < d; ++q)
            wbar[static_cast<std::size_t>(data.classes[t])][static_cast<std::size_t>(q)] +=
                data.attrs[t][static_cast<std::size_t>(q)];
    for (int m = 0; m < M; ++m)
        for (int q = 0; q < d; ++q)
            wbar[static_cast<std::size_t>(m)][static_cast<std::size_t>(q)] /=
                static_cast<double>(count[static_cast<std::size_t>(m)]);

    const int nw = M * d;
    const int total = nw + P;

    LiftedBounds bounds;
    bounds.safety = spec.safety;
    bounds.pilot_size = static_cast<std::int64_t>(R);
    bounds.a_hi.assign(static_cast<std::size_t>(P), 0.0);

    std::vector<RandomFn> parts(static_cast<std::size_t>(P));
    std::vector<ScalarOracle> phis(static_cast<std::size_t>(P));
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            if (i == j) continue;
            const int idx = pair_index(M, i, j);
            const double tau = spec.margins[static_cast<std::size_t>(idx)];
            if (!std::isfinite(tau)) throw std::invalid_argument("margins must be finite");

            // Pilot scale interval from the class-i margins at the class-mean
            // discriminant, at exceedance threshold -tau.
            std::vector<double> vals;
            for (std::size_t t = 0; t < R; ++t) {
                if (data.classes[t] != i) continue;
                double v = 0.0;
                for (int q = 0; q < d; ++q)
                    v += (wbar[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)] -
                          wbar[static_cast<std::size_t>(i)][static_cast<std::size_t>(q)]) *
                         data.attrs[t][static_cast<std::size_t>(q)];
                vals.push_back(v);
            }
            bounds.a_hi[static_cast<std::size_t>(idx)] =
                bounds.safety *
                lifted_cap(EmpiricalRV::uniform(std::move(vals)), -tau, bounds.pilot_warning);

            // Margin loss (w_j - w_i) . mu over the score stack, sample row
            // sliced to the attribute part.
            RandomVectorOracle margin;
            margin.eval = [i, j, d](const Vec& w, const Vec& mu) {
                double v = 0.0;
                for (int q = 0; q < d; ++q)
                    v += (w[static_cast<std::size_t>(j * d + q)] -
                          w[static_cast<std::size_t>(i * d + q)]) *
                         mu[static_cast<std::size_t>(q)];
                return Vec{v};
            };
            margin.subgrad = [i, j, d, nw](const Vec&, const Vec& mu, int) {
                Vec g(static_cast<std::size_t>(nw), 0.0);
                for (int q = 0; q < d; ++q) {
                    g[static_cast<std::size_t>(j * d + q)] = mu[static_cast<std::size_t>(q)];
                    g[static_cast<std::size_t>(i * d + q)] = -mu[static_cast<std::size_t>(q)];
                }
                return g;
            };
            const double pi = freq[static_cast<std::size_t>(i)];
            ScaleFn scale = [i, pi](const Vec& xi) {
                return static_cast<int>(std::llround(xi[0])) == i ? 1.0 / pi : 0.0;
            };
            InnerLoss u{std::move(margin), nw, 1, d};
            parts[static_cast<std::size_t>(idx)] = RandomFn::dc_smooth(
                1, product_g(u, total, nw + idx, 1.0, tau, 1.0, scale),
                product_h(u, total, nw + idx, scale), kNaN);
            phis[static_cast<std::size_t>(idx)] = coordinate_hinge(idx);
        }
    }

    CompoundProblem p;
    p.G = RandomFn::stacked(std::move(parts));
    p.F = RandomFn::none();

    const std::vector<std::vector<int>> groups = spec.partitions;
    const std::vector<double> weights = spec.group_weights;
    ScalarOracle psi;
    psi.eval = [groups, weights](const Vec& y) {
        double v = 0.0;
        for (std::size_t s = 0; s < groups.size(); ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int t : groups[s]) best = std::max(best, y[static_cast<std::size_t>(t)]);
            v += weights[s] * best;
        }
        return v;
    };
    psi.subgrad = [groups, weights](const Vec& y) {
        Vec g(y.size(), 0.0);
        for (std::size_t s = 0; s < groups.size(); ++s) {
            int tbest = groups[s].front();
            double best = -std::numeric_limits<double>::infinity();
            for (int t : groups[s]) {
                if (y[static_cast<std::size_t>(t)] > best) {
                    best = y[static_cast<std::size_t>(t)];
                    tbest = t;
                }
            }
            g[static_cast<std::size_t>(tbest)] += weights[s];
        }
        return g;
    };
    double weight_sum = 0.0;
    for (double a : weights) weight_sum += a;
    p.outer.psi = std::move(psi);
    p.outer.phi = std::move(phis);
    p.outer.isotone = true;
    p.outer.lip_psi = std::max(weight_sum, 1.0);
    p.outer.lip_phi = 1.0;

    const double Rw = spec.weight_radius;
    FeasibleSet W = FeasibleSet::box(Vec(static_cast<std::size_t>(nw), -Rw),
                                     Vec(static_cast<std::size_t>(nw), Rw));
    p.X = FeasibleSet::product(W, FeasibleSet::box(Vec(static_cast<std::size_t>(P), 0.0),
                                                   Vec(bounds.a_hi)));
    p.xi_dist = DistributionSpec::empirical(std::move(rows));
    return BuiltProblem{std::move(p), bounds};
}

}  // namespace smm
