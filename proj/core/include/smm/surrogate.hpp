#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "smm/distribution.hpp"
#include "smm/problem.hpp"

namespace smm {

/// One scalar component of a per-sample convex majorant, anchored at `base`
/// for the sample `xi`:
///   piece(x) = raw(x) + (quad_kappa/2)||x - base||^2 - drop_c - drop_a^T (x - base).
/// Smooth structures use the quadratic term (raw = the function itself); DC
/// structures use the affine drop (raw = the convex part g, drop = the
/// concave part linearized at the anchor).
struct LinearizedPiece {
    Vec base;
    Vec xi;
    std::function<double(const Vec& x)> raw_value;
    std::function<Vec(const Vec& x)> raw_subgrad;
    double quad_kappa = 0.0;
    double drop_c = 0.0;
    Vec drop_a;

    double value(const Vec& x) const;
    Vec subgrad(const Vec& x) const;
};

/// Majorant pieces (one per component) for a smooth-tagged function:
/// fn(x, xi) + (kappa0/2)||x - base||^2.
std::vector<LinearizedPiece> build_smooth_surrogate(const RandomFn& fn, const Vec& x_base,
                                                    const Vec& xi);

/// Majorant pieces (one per component) for a DC-tagged function (smooth or
/// max-smooth concave part): g(x, xi) - h(base, xi) - a^T (x - base) with the
/// lowest-index subgradient/piece selection at the anchor.
std::vector<LinearizedPiece> build_dc_surrogate(const RandomFn& fn, const Vec& x_base,
                                                const Vec& xi);

/// The scale-free default tie tolerance for active-piece detection:
/// 1e-6 * (1 + |max_k pieces_k(base)|).
double default_active_eps(const std::vector<SmoothPiece>& pieces, const Vec& base);

/// Indices k with pieces_k(base) >= max_j pieces_j(base) - eps, ascending.
/// Pass eps < 0 to use the default tolerance; eps = 0 selects exact ties.
std::vector<int> eps_active_pieces(const std::vector<SmoothPiece>& pieces, const Vec& base,
                                   double eps);

/// All majorant pieces of a max-smooth-tagged function: for each component,
/// one LinearizedPiece per eps-active piece index (ascending).  Pass eps < 0
/// to use the per-component default tolerance.  The pointwise minimum over a
/// component's pieces is the eps-tightened majorant of that component.
std::vector<std::vector<LinearizedPiece>> build_maxsmooth_surrogate(const RandomFn& fn,
                                                                    const Vec& x_base,
                                                                    const Vec& xi, double eps);

/// Per-component eps-active piece index sets of a problem's max-smooth parts
/// at a base point (deterministic pieces, so sets are sample-independent).
/// Components without piece structure get empty lists.
struct EpsActiveSet {
    double epsilon = 0.0;  ///< eps argument (< 0 means per-component default)
    std::vector<std::vector<int>> g_active;
    std::vector<std::vector<int>> f_active;
};
EpsActiveSet eps_active_sets(const CompoundProblem& p, const Vec& base, double eps);

/// The sampled surrogate model
///   V_N(x; base) = psi( (1/n) sum_t phi( Ghat^t(x), (1/m) sum_s Fhat^s(x) ) )
///                  [ + (1/(2 rho)) ||x - prox_center||^2 ],
/// built from one canonical (or explicitly selected) majorant per sample.
/// Immutable after construction (set_prox before use); evaluations are
/// reentrant and use fixed left-to-right reductions.
struct SurrogateModel {
    // One structural leaf of the G- or F-block with its per-sample majorant
    // data precomputed at the anchor.
    struct Leaf {
        int dim = 0;
        std::size_t ofs = 0;  ///< component offset within its block
        bool in_g = true;
        RandomVectorOracle raw;  ///< convex part (whole function for smooth leaves)
        double quad_kappa = 0.0;
        bool has_drop = false;
        bool drop_per_sample = false;          ///< drops vary with the sample (DC leaves)
        std::vector<Vec> drop_c;               ///< [sample][comp] (size 1 if deterministic)
        std::vector<std::vector<Vec>> drop_a;  ///< [sample][comp] -> slope
    };

    Vec base;
    SampleBatch xi_batch, eta_batch;
    OuterMap outer;
    int lg = 0, lf = 0;
    std::vector<Leaf> leaves;

    bool prox_set = false;
    Vec prox_center;
    double rho = 0.0;

    int dim() const { return static_cast<int>(base.size()); }
};

/// Build the canonical surrogate model at `base` over the given batches
/// (lowest-index piece selection for max-smooth parts).  Batches consumed by
/// present blocks must be nonempty.
SurrogateModel build_surrogate_model(const CompoundProblem& p, const Vec& base,
                                     const SampleBatch& xi_batch, const SampleBatch& eta_batch);

/// As above with an explicit piece selection for max-smooth components:
/// g_pick / f_pick give the chosen piece index per block component (-1 for
/// components without piece structure).
SurrogateModel build_surrogate_model(const CompoundProblem& p, const Vec& base,
                                     const SampleBatch& xi_batch, const SampleBatch& eta_batch,
                                     const std::vector<int>& g_pick,
                                     const std::vector<int>& f_pick);

/// Attach the proximal term (1/(2 rho)) ||x - center||^2.
void set_prox(SurrogateModel& m, Vec center, double rho);

/// Surrogate value at x (prox term included when set).
double surrogate_value(const SurrogateModel& m, const Vec& x);

struct ValueSubgrad {
    double value = 0.0;
    Vec subgrad;
};

/// Value and a valid subgradient of the surrogate at x, assembled by the
/// isotone convex chain rule with lowest-index selections at kinks.
ValueSubgrad surrogate_value_subgrad(const SurrogateModel& m, const Vec& x);

/// All eps-active piece selections of a problem's max-smooth components at a
/// base point, enumerated in lexicographic order (earlier components more
/// significant, piece indices ascending).  A problem with no max-smooth
/// components yields the single canonical selection.  Throws
/// std::invalid_argument when the tuple count would exceed `cap`.
struct TupleEnumeration {
    std::vector<std::vector<int>> g_picks;  ///< [tuple] -> per-G-component pick
    std::vector<std::vector<int>> f_picks;  ///< [tuple] -> per-F-component pick
};
TupleEnumeration enumerate_active_tuples(const CompoundProblem& p, const Vec& base, double eps,
                                         int cap);

}  // namespace smm
