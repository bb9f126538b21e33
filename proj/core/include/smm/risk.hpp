#pragma once

#include <limits>
#include <vector>

namespace smm {

/// A scalar random variable with finitely many atoms.  An empty weight list
/// means the uniform distribution over the values.
struct EmpiricalRV {
    std::vector<double> values;
    std::vector<double> weights;

    static EmpiricalRV uniform(std::vector<double> values);

    /// Nonempty, matching sizes, weights >= 0 summing to 1 (1e-9); throws
    /// std::invalid_argument otherwise.
    void validate() const;

    double mean() const;
    double min_value() const;
    double max_value() const;
};

/// Concave nondecreasing utility normalized so that u(0) = 0 and the
/// subdifferential at 0 contains 1.
struct UtilitySpec {
    enum class Kind { Linear, PiecewiseLinearCVaR, Exponential };

    Kind kind = Kind::Linear;
    double alpha = 0.5;  ///< PiecewiseLinearCVaR: u(t) = -(1/(1-alpha)) [-t]_+
    double gamma = 1.0;  ///< Exponential: u(t) = (1 - exp(-gamma t)) / gamma

    static UtilitySpec linear();
    static UtilitySpec piecewise_linear_cvar(double alpha);
    static UtilitySpec exponential(double gamma);

    double value(double t) const;

    /// One element of the superdifferential of u at t (the lowest-slope
    /// piece at a kink), used as the chain-rule factor in builder oracles.
    double subderiv(double t) const;
};

/// Probe the utility contracts (concavity, monotonicity, u(0) = 0,
/// 1 in the subdifferential at 0) on a grid; throws std::invalid_argument
/// naming the violated contract.
void check_utility(const UtilitySpec& u);

/// Left-continuous quantile min{z : P(Z <= z) >= alpha}, alpha in (0,1).
double var(const EmpiricalRV& Z, double alpha);

/// Conditional value-at-risk at level alpha in (0,1), computed by the sorted
/// tail average and cross-checked against the minimization
/// min_eta eta + (1/(1-alpha)) E[Z-eta]_+ over the atoms (the two routes
/// must agree to 1e-9).
double cvar(const EmpiricalRV& Z, double alpha);

/// Probability of exceedance P(Z > tau), strict inequality.
double poe(const EmpiricalRV& Z, double tau);

/// Buffered probability of exceedance min_{a >= 0} E[a (Z - tau) + 1]_+
/// with the optimal-solution interval [a_lo, a_hi].
///
/// Edge cases: tau <= E[Z] gives value 1 attained at a = 0; tau equal to the
/// top atom gives the analytic limit P(Z >= tau), approached but not
/// attained (at_sup_limit); tau above the top atom gives 0 on an unbounded
/// optimal set [a_lo, infinity) (unbounded_a).
struct BpoeResult {
    double value = 0.0;
    double a_lo = 0.0;
    double a_hi = 0.0;
    bool at_sup_limit = false;
    bool unbounded_a = false;
};
BpoeResult bpoe(const EmpiricalRV& Z, double tau);

/// Optimized certainty equivalent sup_eta eta + E[u(Z - eta)], maximized
/// over eta in [min Z, max Z] by golden-section search refined at the atoms
/// (the maximizer location is resolved to 1e-9).
struct OceResult {
    double value = 0.0;
    double eta_star = 0.0;
};
OceResult oce(const EmpiricalRV& Z, const UtilitySpec& u);

}  // namespace smm
