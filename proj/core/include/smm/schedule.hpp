#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace smm {

/// Result of checking a sample-size sequence against the two-sided growth
/// condition max{N_{k-1}+1, c2*k^{1+2c1}} <= N_k <= N_{k-1}/(1 - c3/k),
/// required for every k in (k_bar, horizon].
struct ScheduleCheck {
    bool ok = true;
    std::int64_t first_bad_k = 0;  ///< first k violating a bound (0 if ok)
    std::string reason;            ///< human-readable description of the violation
};

/// Incremental sample-size schedule N_1..N_horizon.
///
/// Above the warm-up index k_bar the default rule is
///   N_k = max(N_{k-1} + 1, ceil(c2 * k^{1+2c1})),
/// which satisfies the two-sided growth condition whenever the parameters
/// make it feasible.  For k <= k_bar the sequence ramps additively with the
/// same polynomial floor, N_k = max(N_{k-1} + k, ceil(c2 * k^{1+2c1})); the
/// floor makes the hand-off at k_bar+1 satisfy the ratio bound for the
/// default parameters.  The warm-up segment is unconstrained by the growth
/// condition and is a documented implementation choice.
struct GrowthSchedule {
    double c1 = 0.25;
    double c2 = 4.0;
    double c3 = 2.0;
    std::int64_t k_bar = 3;
    std::int64_t N_init = 4;
    std::int64_t horizon = 30;

    /// Generate N_1..N_horizon with the default rules.  Throws
    /// std::invalid_argument naming the first violating k when the parameter
    /// triple is infeasible (the lower bound exceeds the upper bound).
    std::vector<std::int64_t> generate() const;

    /// Check an arbitrary sequence (interpreted as N_1..N_len) against the
    /// two-sided growth condition for every k in (k_bar, len].
    ScheduleCheck validate(const std::vector<std::int64_t>& seq) const;

    /// Parameter sanity: c1, c2 > 0, k_bar >= 1, c3 < k_bar, N_init >= 1.
    /// Throws std::invalid_argument on violation.
    void check_params() const;
};

}  // namespace smm
