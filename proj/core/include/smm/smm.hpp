#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "smm/problem.hpp"
#include "smm/schedule.hpp"
#include "smm/subsolver.hpp"

namespace smm {

/// Residual-based stopping: every `check_every` outer iterations draw fresh
/// independent batches of size `residual_N`, compute the fixed-point residual
/// at the current iterate, and stop once the residual is at most
/// `residual_tol` at two consecutive checks whose `residual_N` is at least
/// the current driver sample size.  `residual_tol <= 0` disables checking.
struct StoppingConfig {
    double residual_tol = 0.0;
    std::int64_t residual_N = 1;
    int check_every = 1;
};

/// Configuration of the majorize-minimize driver.
struct SmmConfig {
    double rho = 1.0;  ///< prox radius; see default_rho for a set-scaled choice
    GrowthSchedule schedule;
    SubsolverConfig subsolver;
    int max_outer_iters = 30;
    StoppingConfig stopping;
    std::uint64_t seed = 0;
    bool timings = false;  ///< record wall-clock ms per iteration (else 0)
};

/// The set-scaled default prox radius: the feasible-set diameter (1 for
/// degenerate sets).
double default_rho(const FeasibleSet& X);

/// One outer-iteration record.  theta_saa is the sample-average objective at
/// the new iterate under the iteration's batches; surrogate_new and
/// surrogate_center carry both sides of the per-iteration descent contract
///   surrogate_new <= surrogate_center + delta.
struct IterateRecord {
    int iter = 0;          ///< outer iteration, 1-based
    std::int64_t N = 0;    ///< schedule sample size this iteration
    double theta_saa = 0.0;
    double step_norm = 0.0;
    double delta = 0.0;
    double gap = std::numeric_limits<double>::infinity();
    double residual = std::numeric_limits<double>::quiet_NaN();  ///< NaN = unchecked
    double wall_ms = 0.0;

    // In-memory diagnostics (not serialized).
    double surrogate_new = 0.0;     ///< prox-model value at the new iterate
    double surrogate_center = 0.0;  ///< model value at the center (prox = 0)
    bool certified = false;
    int winning_tuple = -1;  ///< enhanced runs: index of the winning selection
};

enum class SmmStatus { Converged, IterLimit, Uncertified };

const char* to_string(SmmStatus s);

struct IterateTrace {
    std::vector<IterateRecord> records;
    SmmStatus status = SmmStatus::IterLimit;
};

struct SmmResult {
    Vec x;
    IterateTrace trace;
};

/// Run the majorize-minimize loop: grow the two independent sample streams to
/// the scheduled size, anchor the canonical surrogate at the current iterate,
/// solve the prox subproblem to delta_nu = delta0/nu^2, and iterate.  Stops
/// on the residual rule, the outer-iteration limit, or schedule exhaustion.
/// Identical (problem, config) runs reproduce the trace bit-identically.
/// An uncertified subproblem does not abort the run but forces final status
/// Uncertified.  Throws std::invalid_argument for bad config or an
/// infeasible schedule (before the first iteration).
SmmResult run_smm(const CompoundProblem& p, const Vec& x0, const SmmConfig& cfg);

/// As run_smm, but each iteration enumerates the eps-active piece selections
/// of max-smooth components and solves one convex program per selection,
/// keeping the best (ties to the lowest index, recorded per iteration).
/// Problems without max-smooth components reduce to run_smm exactly.
SmmResult run_enhanced_smm(const CompoundProblem& p, const Vec& x0, const SmmConfig& cfg,
                           double eps);

/// The sample-based fixed-point residual at x_hat: draw fresh batches of size
/// N from residual-dedicated streams, minimize the anchored surrogate plus
/// (1/(2 rho))||x - x_hat||^2 to the tightest certificate available, and
/// report r = ||x_hat - x_mapped||.
struct ResidualReport {
    Vec x_hat;
    Vec x_mapped;
    double r = 0.0;
    std::int64_t N = 0;
    double certificate = std::numeric_limits<double>::infinity();
    bool certified = false;  ///< false: budget ran out, r is best-effort
};

ResidualReport fixed_point_residual(const CompoundProblem& p, const Vec& x_hat, double rho,
                                    std::int64_t N, std::uint64_t seed);

/// Serialize a trace as CSV with header
///   iter,N,theta_saa,step_norm,delta,gap,residual,wall_ms
/// and %.17g floating-point fields (an unchecked residual prints as nan).
std::string trace_to_csv(const IterateTrace& trace);

/// Write trace_to_csv to a file; throws std::runtime_error on I/O failure.
void write_trace_csv(const IterateTrace& trace, const std::string& path);

}  // namespace smm
