#include "smm/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace smm {

namespace {

struct Atom {
    double z = 0.0;
    double w = 0.0;
};

std::vector<Atom> sorted_atoms(const EmpiricalRV& Z) {
    Z.validate();
    const std::size_t n = Z.values.size();
    std::vector<Atom> atoms(n);
    for (std::size_t i = 0; i < n; ++i) {
        atoms[i].z = Z.values[i];
        atoms[i].w = Z.weights.empty() ? 1.0 / static_cast<double>(n) : Z.weights[i];
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.z < b.z; });
    return atoms;
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in the open interval (0, 1)");
}

}  // namespace

EmpiricalRV EmpiricalRV::uniform(std::vector<double> values) {
    EmpiricalRV rv;
    rv.values = std::move(values);
    return rv;
}

void EmpiricalRV::validate() const {
    if (values.empty()) throw std::invalid_argument("empirical variable needs at least one atom");
    if (!weights.empty()) {
        if (weights.size() != values.size())
            throw std::invalid_argument("weights and values must have equal length");
        double sum = 0.0;
        for (double w : weights) {
            if (w < -1e-12) throw std::invalid_argument("weights must be nonnegative");
            sum += w;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("weights must sum to 1");
    }
    for (double z : values)
        if (!std::isfinite(z)) throw std::invalid_argument("atom values must be finite");
}

double EmpiricalRV::mean() const {
    validate();
    double m = 0.0;
    if (weights.empty()) {
        for (double z : values) m += z;
        return m / static_cast<double>(values.size());
    }
    for (std::size_t i = 0; i < values.size(); ++i) m += weights[i] * values[i];
    return m;
}

double EmpiricalRV::min_value() const {
    validate();
    return *std::min_element(values.begin(), values.end());
}

double EmpiricalRV::max_value() const {
    validate();
    return *std::max_element(values.begin(), values.end());
}

UtilitySpec UtilitySpec::linear() { return UtilitySpec{Kind::Linear, 0.5, 1.0}; }

UtilitySpec UtilitySpec::piecewise_linear_cvar(double alpha) {
    check_alpha(alpha);
    return UtilitySpec{Kind::PiecewiseLinearCVaR, alpha, 1.0};
}

UtilitySpec UtilitySpec::exponential(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    return UtilitySpec{Kind::Exponential, 0.5, gamma};
}

double UtilitySpec::value(double t) const {
    switch (kind) {
        case Kind::Linear: return t;
        case Kind::PiecewiseLinearCVaR: return -std::max(-t, 0.0) / (1.0 - alpha);
        case Kind::Exponential: return (1.0 - std::exp(-gamma * t)) / gamma;
    }
    return t;
}

double UtilitySpec::subderiv(double t) const {
    switch (kind) {
        case Kind::Linear: return 1.0;
        case Kind::PiecewiseLinearCVaR: return t < 0.0 ? 1.0 / (1.0 - alpha) : 0.0;
        case Kind::Exponential: return std::exp(-gamma * t);
    }
    return 1.0;
}

void check_utility(const UtilitySpec& u) {
    if (std::fabs(u.value(0.0)) > 1e-12)
        throw std::invalid_argument("utility must satisfy u(0) = 0");
    const double h = 1e-6;
    const double left = (u.value(0.0) - u.value(-h)) / h;
    const double right = (u.value(h) - u.value(0.0)) / h;
    if (left < 1.0 - 1e-4 || right > 1.0 + 1e-4)
        throw std::invalid_argument("utility subdifferential at 0 must contain 1");
    for (int i = 0; i < 100; ++i) {
        const double a = -5.0 + 10.0 * i / 100.0;
        const double b = a + 0.1;
        if (u.value(b) < u.value(a) - 1e-12)
            throw std::invalid_argument("utility must be nondecreasing");
        const double mid = u.value(0.5 * (a + b));
        if (mid < 0.5 * (u.value(a) + u.value(b)) - 1e-12)
            throw std::invalid_argument("utility must be concave");
    }
}

double var(const EmpiricalRV& Z, double alpha) {
    check_alpha(alpha);
    const auto atoms = sorted_atoms(Z);
    double cum = 0.0;
    for (const Atom& a : atoms) {
        cum += a.w;
        if (cum >= alpha - 1e-12) return a.z;
    }
    return atoms.back().z;
}

double cvar(const EmpiricalRV& Z, double alpha) {
    check_alpha(alpha);
    const auto atoms = sorted_atoms(Z);
    const double q = var(Z, alpha);

    // Route 1: average of the upper (1 - alpha) tail, with the partial atom
    // at the quantile.
    double cum_at_q = 0.0;
    double tail = 0.0;
    for (const Atom& a : atoms) {
        if (a.z <= q)
            cum_at_q += a.w;
        else
            tail += a.w * a.z;
    }
    const double v_tail = ((cum_at_q - alpha) * q + tail) / (1.0 - alpha);

    // Route 2: minimize eta + (1/(1-alpha)) E[Z - eta]_+ over the atoms.
    double v_opt = std::numeric_limits<double>::infinity();
    for (const Atom& c : atoms) {
        double excess = 0.0;
        for (const Atom& a : atoms) excess += a.w * std::max(a.z - c.z, 0.0);
        v_opt = std::min(v_opt, c.z + excess / (1.0 - alpha));
    }

    if (std::fabs(v_tail - v_opt) > 1e-9 * (1.0 + std::fabs(v_tail)))
        throw std::logic_error("tail and minimization routes for cvar disagree");
    return v_tail;
}

double poe(const EmpiricalRV& Z, double tau) {
    const auto atoms = sorted_atoms(Z);
    double p = 0.0;
    for (const Atom& a : atoms)
        if (a.z > tau) p += a.w;
    return p;
}

BpoeResult bpoe(const EmpiricalRV& Z, double tau) {
    const auto atoms = sorted_atoms(Z);
    const double mean = Z.mean();
    const double lo = atoms.front().z;
    const double hi = atoms.back().z;
    const double inf = std::numeric_limits<double>::infinity();

    BpoeResult out;
    if (tau <= mean) {
        // a = 0 already attains the minimum value 1.
        out.value = 1.0;
        out.a_lo = 0.0;
        if (tau < mean) {
            out.a_hi = 0.0;
        } else if (lo < tau) {
            // At tau = E[Z] every a keeping all terms nonnegative is optimal.
            out.a_hi = 1.0 / (tau - lo);
        } else {  // all atoms equal tau: every a >= 0 is optimal
            out.a_hi = inf;
            out.unbounded_a = true;
        }
        return out;
    }
    if (tau > hi) {
        out.value = 0.0;
        out.a_lo = 1.0 / (tau - hi);
        out.a_hi = inf;
        out.unbounded_a = true;
        return out;
    }
    if (tau == hi) {
        // The infimum is approached as a grows without bound.
        double mass_at_sup = 0.0;
        for (const Atom& a : atoms)
            if (a.z >= tau) mass_at_sup += a.w;
        out.value = mass_at_sup;
        out.a_lo = inf;
        out.a_hi = inf;
        out.at_sup_limit = true;
        return out;
    }

    // E[Z] < tau < sup: the piecewise-linear objective attains its minimum
    // on an interval whose endpoints are breakpoints a = 1/(tau - z) (or 0).
    auto objective = [&](double a) {
        double v = 0.0;
        for (const Atom& atom : atoms) v += atom.w * std::max(a * (atom.z - tau) + 1.0, 0.0);
        return v;
    };
    std::vector<double> candidates{0.0};
    for (const Atom& a : atoms)
        if (a.z < tau) candidates.push_back(1.0 / (tau - a.z));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double vmin = inf;
    for (double a : candidates) vmin = std::min(vmin, objective(a));
    const double tol = 1e-12 * (1.0 + std::fabs(vmin));
    double a_lo = inf, a_hi = -inf;
    for (double a : candidates) {
        if (objective(a) <= vmin + tol) {
            a_lo = std::min(a_lo, a);
            a_hi = std::max(a_hi, a);
        }
    }
    out.value = vmin;
    out.a_lo = a_lo;
    out.a_hi = a_hi;
    return out;
}

OceResult oce(const EmpiricalRV& Z, const UtilitySpec& u) {
    const auto atoms = sorted_atoms(Z);
    auto q = [&](double eta) {
        double v = eta;
        for (const Atom& a : atoms) v += a.w * u.value(a.z - eta);
        return v;
    };

    double lo = atoms.front().z;
    double hi = atoms.back().z;
    OceResult out;
    if (hi - lo <= 1e-15) {
        out.eta_star = lo;
        out.value = q(lo);
        return out;
    }

    // Golden-section on the concave objective down to 1e-9 in eta.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - invphi * (hi - lo);
    double d = lo + invphi * (hi - lo);
    double qc = q(c), qd = q(d);
    for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
        if (qc >= qd) {
            hi = d;
            d = c;
            qd = qc;
            c = hi - invphi * (hi - lo);
            qc = q(c);
        } else {
            lo = c;
            c = d;
            qc = qd;
            d = lo + invphi * (hi - lo);
            qd = q(d);
        }
    }
    double best_eta = 0.5 * (lo + hi);
    double best_v = q(best_eta);

    // For piecewise-linear utilities the maximum sits at an atom; refine
    // against every atom (and the support endpoints) exactly.
    for (const Atom& a : atoms) {
        const double v = q(a.z);
        if (v > best_v) {
            best_v = v;
            best_eta = a.z;
        }
    }
    out.value = best_v;
    out.eta_star = best_eta;
    return out;
}

}  // namespace smm
