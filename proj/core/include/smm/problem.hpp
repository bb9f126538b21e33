#pragma once

#include <string>
#include <vector>

#include "smm/distribution.hpp"
#include "smm/feasible_set.hpp"
#include "smm/oracles.hpp"

namespace smm {

/// A compound stochastic program
///   min_{x in X}  psi( E[ phi( G(x, xi), E[F(x, xi)] ) ] )
/// with isotone convex outer maps and structured random inner functions.
/// Either G or F may be absent (dimension 0), not both.
struct CompoundProblem {
    OuterMap outer;
    RandomFn G;
    RandomFn F;
    FeasibleSet X;
    DistributionSpec xi_dist;

    int lg() const { return G.dim_out; }
    int lf() const { return F.dim_out; }
    /// Input dimension of each phi component: dim(G) + dim(F).
    int inner_dim() const { return lg() + lf(); }
};

/// One probed contract of validate_problem.
struct ContractCheck {
    std::string name;
    bool passed = true;
    bool skipped = false;
    double worst_violation = 0.0;
    std::string note;
};

/// The outcome of probing a problem's structural contracts.
struct ValidationReport {
    std::vector<ContractCheck> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.skipped && !c.passed) return false;
        return true;
    }
    const ContractCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

/// Spot-check the problem's contracts on randomly sampled probe points:
/// convexity of the outer maps and of the per-sample majorants, isotonicity
/// of psi and phi, touching and majorization of the structure-implied
/// majorants, and the declared curvature bound (checked as
/// fn + (kappa0/2)||x - x'||^2 >= majorant; skipped when kappa0 is NaN).
/// Probes never mutate the problem.  Throws std::invalid_argument on
/// dimension mismatches between psi, phi, G, and F.
ValidationReport validate_problem(const CompoundProblem& p, int probe_count,
                                  std::uint64_t rng_seed);

/// Exact penalization: fold expectation constraints Theta_i(x) <= 0 into the
/// objective,
///   Theta_0(x) + rho_pen * sum_i max{Theta_i(x), 0},
/// by stacking all inner blocks and wrapping the outer maps.  All problems
/// must share the feasible set and sample distribution (structurally
/// compared); mismatches throw std::invalid_argument.  With no constraints
/// the objective is returned unchanged.
CompoundProblem penalize_constraints(const CompoundProblem& objective,
                                     const std::vector<CompoundProblem>& constraints,
                                     double rho_pen);

}  // namespace smm
