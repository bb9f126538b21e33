#pragma once

#include <cstdint>
#include <vector>

#include "smm/distribution.hpp"
#include "smm/problem.hpp"

namespace smm {

/// Sample-average value of the compound objective,
///   psi( (1/n) sum_t phi( G(x, xi^t), (1/m) sum_s F(x, eta^s) ) ),
/// with the inner F-average computed once and reused across the outer
/// samples.  The batch for an absent inner function may be empty; a batch
/// that is actually consumed must be nonempty (std::invalid_argument).
double saa_objective(const CompoundProblem& p, const SampleBatch& xi_batch,
                     const SampleBatch& eta_batch, const Vec& x);

/// One row of a sampling-error experiment: sample size and the mean absolute
/// SAA error over the trials.
struct SaaRateRow {
    std::int64_t N = 0;
    double mean_abs_error = 0.0;
};

/// Result of saa_rate_experiment: the error table and the least-squares slope
/// of log(mean error) against log(N).
struct SaaRateResult {
    std::vector<SaaRateRow> rows;
    double slope = 0.0;
    bool slope_defined = false;  ///< false when errors vanish (no sampling noise)
    bool exact = false;          ///< all errors identically zero
    bool high_variance = false;  ///< too few trials for a stable slope
};

/// Estimate the SAA error decay rate at a fixed point: for each N in `sizes`
/// run `trials` independent evaluations with fresh batches of size N for both
/// streams, record mean |Theta_bar_{N,N}(x) - theta_true|, and fit the
/// log-log slope by least squares.  Throws std::invalid_argument for fewer
/// than 2 sizes or nonpositive trials/sizes.
SaaRateResult saa_rate_experiment(const CompoundProblem& p, const Vec& x, double theta_true,
                                  const std::vector<std::int64_t>& sizes, int trials,
                                  std::uint64_t seed);

}  // namespace smm
