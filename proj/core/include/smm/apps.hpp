#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smm/problem.hpp"
#include "smm/risk.hpp"

namespace smm {

/// A scalar random loss f(x, xi) used as the inner ingredient of the
/// application builders.  `fn` is a 1-D tagged random function over the
/// decision x alone (the builders lift it into the extended variable space
/// themselves).  `is_affine` declares that x -> f(x, xi) is affine for every
/// xi; the buffered-probability builders rely on it to form convex splits of
/// the product a * f(x, xi) and reject non-affine losses.
struct LossSpec {
    int n = 0;           ///< decision dimension of f
    RandomFn fn;         ///< 1-D random function with structure tag
    bool is_affine = false;

    /// Portfolio loss f(x, xi) = -x . xi (negative return of weights x).
    static LossSpec affine_portfolio(int n);
};

/// Bounds the builders derived for the lifted auxiliary variables, plus the
/// bookkeeping of the pilot estimation that produced them.
struct LiftedBounds {
    double eta_min = 0.0;        ///< shift-variable range (OCE builder)
    double eta_max = 0.0;
    std::vector<double> a_hi;    ///< upper bound per lifted scale variable
    std::int64_t pilot_size = 0; ///< pilot draws used per estimate
    double safety = 10.0;        ///< safety factor applied to pilot estimates
    bool pilot_warning = false;  ///< threshold-feasibility check failed on the
                                 ///< pilot; bounds were enlarged by fallback
};

/// A built application problem: the compound program plus the lifted-variable
/// bounds chosen by the builder.  The extended decision is z = (x, lifted),
/// with the original decision in the first LossSpec::n coordinates.
struct BuiltProblem {
    CompoundProblem problem;
    LiftedBounds bounds;
};

/// Optimized-certainty-equivalent risk of the centered loss, lifted over
/// z = (x, eta):
///   min_z  E[ -u(f(x,xi) - E f(x,.) - eta) ] - eta.
/// The shift range [eta_min, eta_max] is estimated from the pilot batch at a
/// set of feasible probe points and widened by 10% of its width on each side;
/// a degenerate pilot range throws std::invalid_argument.  The utility is
/// checked with check_utility.
BuiltProblem build_oce_deviation(const LossSpec& loss, const UtilitySpec& u,
                                 const FeasibleSet& X, const DistributionSpec& xi,
                                 const SampleBatch& pilot);

/// Buffered probability that the centered loss exceeds tau, lifted over
/// z = (x, a) with a in [0, A]:
///   min_z  E[ [ a (f(x,xi) - E f(x,.) - tau) + 1 ]_+ ].
/// A is the upper endpoint of the optimal-scale interval of the pilot
/// deviations (per probe point), times the safety factor.  If tau is not
/// strictly below the pilot's largest deviation at some probe the estimate
/// degenerates: the builder records a warning and enlarges the bound from the
/// breakpoint ladder instead.  Requires an affine loss.
BuiltProblem build_bpoe_deviation(const LossSpec& loss, double tau,
                                  const FeasibleSet& X, const DistributionSpec& xi,
                                  const SampleBatch& pilot);

/// Distributionally robust mixture of buffered probabilities over K candidate
/// component distributions and J thresholds, lifted over z = (x, a_1..a_J):
///   min_z  max_k  sum_j beta_j E_k[ [ a_j (f(x,xi) - tau_j) + 1 ]_+ ].
/// Sampling concatenates one independent draw per component into each row, so
/// the per-component expectations share a sample index.  Each a_j bound is
/// the largest per-component pilot scale interval endpoint times the safety
/// factor.  Requires an affine loss, K >= 1 components with equal draw
/// dimension, J >= 1 thresholds, and beta_j >= 0.
BuiltProblem build_dr_mixed_bpoe(const LossSpec& loss,
                                 const std::vector<double>& taus,
                                 const std::vector<double>& betas,
                                 const std::vector<DistributionSpec>& components,
                                 const FeasibleSet& X,
                                 const std::vector<SampleBatch>& pilots);

/// Labeled classification data: one class index (0-based) and one attribute
/// vector per row.  All attribute vectors share a dimension.
struct LabeledData {
    std::vector<int> classes;
    std::vector<Vec> attrs;
};

/// Configuration of the multiclass buffered-misclassification builder.
struct MulticlassSpec {
    int M = 0;  ///< number of classes (>= 2)
    /// Groups of ordered-pair indices (see pair_index); their union must
    /// cover every ordered pair (i, j), i != j.
    std::vector<std::vector<int>> partitions;
    std::vector<double> group_weights;  ///< one weight >= 0 per group
    /// One margin per ordered pair, in pair_index order.
    std::vector<double> margins;
    double weight_radius = 10.0;  ///< box radius of each class score vector
    double safety = 10.0;         ///< safety factor on pilot scale bounds
};

/// Canonical index of the ordered class pair (i, j), i != j, in the flat
/// lifted-variable and margin layout: i-major, j ascending with i skipped.
int pair_index(int M, int i, int j);

/// Multiclass buffered-misclassification risk with linear per-class scores
/// h_m(w, mu) = w_m . mu, lifted over z = (w_0..w_{M-1}, a_pairs):
///   min_z sum_s alpha_s max_{(i,j) in T_s}
///         E_{mu ~ class i}[ [ a_ij ((w_j - w_i).mu + tau_ij) + 1 ]_+ ].
/// Class-conditional expectations are realized by indicator weighting of the
/// empirical row distribution (class index first, then attributes).  Scale
/// bounds come from pilot intervals at the class-mean discriminant.  Throws
/// std::invalid_argument for M < 2, an empty class, uncovered pairs, negative
/// weights, or mismatched margin counts.
BuiltProblem build_bpoe_multiclass(const LabeledData& data, const MulticlassSpec& spec);

/// Decision rule of the multiclass model: the class whose score vector gives
/// the largest inner product with `attrs` (lowest index wins ties).
/// `stacked_weights` is the first M * dim(attrs) coordinates of the built
/// problem's decision.
int classify(const Vec& stacked_weights, int M, const Vec& attrs);

}  // namespace smm
