#pragma once

#include <limits>
#include <vector>

#include "smm/feasible_set.hpp"
#include "smm/surrogate.hpp"

namespace smm {

/// Configuration of the proximal subproblem solver.
struct SubsolverConfig {
    int max_iters = 4000;     ///< evaluation budget per solve
    double delta0 = 1e-3;     ///< per-iteration accuracy delta_nu = delta0 / nu^2
    int subgrad_round = 40;   ///< subgradient steps between polish phases
    int enum_cap = 64;        ///< active-tuple cap for the enumerated variant

    /// The summable per-iteration accuracy sequence delta_nu = delta0 / nu^2.
    double delta_for(int nu) const {
        return delta0 / (static_cast<double>(nu) * static_cast<double>(nu));
    }
};

/// Outcome of one proximal subproblem solve.
struct SubsolveResult {
    Vec x_out;            ///< feasible (projected) minimizer estimate
    double value = 0.0;   ///< prox-surrogate value at x_out
    double certified_gap = std::numeric_limits<double>::infinity();
    int iters_used = 0;   ///< evaluations consumed
    bool certified = false;  ///< certified_gap <= requested delta
    int winning_tuple = -1;  ///< enumerated variant: index of the winning model
};

/// Solve min_{x in X} V(x; base) + (1/(2 rho)) ||x - center||^2 to certified
/// accuracy `delta`, warm-started at `x_start`.
///
/// Projected subgradient steps with the strongly-convex schedule
/// gamma_t = 2 rho / (t+1) and t-weighted iterate averaging alternate with a
/// monotone projected-gradient polish.  The optimality certificate combines
/// (a) the strong-convexity gap bound from the projected-subgradient
/// residual, ||x - P_X(x - rho g)||^2 * (1/(2 rho)) * c_cert with c_cert = 2,
/// and (b) the averaging bound 2 G^2 rho / (T+1) as a fallback where the
/// residual is uninformative (kinks).  If the budget runs out first, the
/// result carries the best gap estimate with certified = false.
///
/// The returned value never exceeds the warm start's value, so a caller
/// passing its current iterate observes non-ascent regardless of
/// certification.
SubsolveResult solve_prox(const SurrogateModel& model, const FeasibleSet& X,
                          const SubsolverConfig& cfg, double delta, const Vec& x_start);

/// Solve one convex program per piece-selection model and return the result
/// of the best one; ties in value go to the lowest index.  Every model must
/// carry the same prox term.
SubsolveResult solve_prox_enumerated(const std::vector<SurrogateModel>& models,
                                     const FeasibleSet& X, const SubsolverConfig& cfg,
                                     double delta, const Vec& x_start);

}  // namespace smm
