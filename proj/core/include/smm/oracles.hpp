#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "smm/vec.hpp"

namespace smm {

/// A convex scalar function given by value and subgradient oracles.  At
/// nondifferentiable points the subgradient oracle must return the piece of
/// lowest index under the function's documented piece ordering, so that every
/// evaluation is deterministic.
struct ScalarOracle {
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> subgrad;
};

/// The outer pair (psi, phi) of a compound objective
/// psi(E[phi(G, E[F])]): psi maps R^{lphi} -> R and phi has lphi convex
/// isotone components mapping R^{l} -> R with l = dim(G) + dim(F).
///
/// lip_psi / lip_phi are declared Lipschitz moduli with respect to a uniform
/// (componentwise) shift: f(y + c*1) <= f(y) + lip * c for c >= 0.  They are
/// used by validation probes only, never by the solver.
struct OuterMap {
    ScalarOracle psi;
    std::vector<ScalarOracle> phi;
    bool isotone = true;
    double lip_psi = 1.0;
    double lip_phi = 1.0;

    int lphi() const { return static_cast<int>(phi.size()); }
};

/// The identity outer map for problems whose objective is a single
/// expectation E[phi_1(...)]: psi(y) = y_1.
OuterMap identity_psi(ScalarOracle phi1, double lip_phi = 1.0);

/// A deterministic smooth convex piece h_k with gradient, used as one piece
/// of a max-of-smooth concave part.
struct SmoothPiece {
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> grad;
};

/// A vector-valued random map (x, xi) -> R^d with per-component subgradients
/// in x.  Evaluation must be finite on X times the sample support and free of
/// hidden mutable state.
struct RandomVectorOracle {
    std::function<Vec(const Vec& x, const Vec& xi)> eval;
    std::function<Vec(const Vec& x, const Vec& xi, int comp)> subgrad;
};

struct RandomFn;

/// Structure tag: the function is smooth with a declared curvature bound
/// kappa0 (Lipschitz modulus of its gradient); its majorant adds the
/// quadratic (kappa0/2)*||x - x'||^2.
struct SmoothTag {
    double kappa0 = 0.0;
};

/// Structure tag: the function is g - h with g convex and h convex with a
/// (sub)gradient oracle; the majorant linearizes h at the base point.
/// kappa0 declares a curvature bound for h (NaN when no finite bound is
/// declared, e.g. when h has kinks).
struct DcSmoothTag {
    RandomVectorOracle g;
    RandomVectorOracle h;
    double kappa0 = 0.0;
};

/// Structure tag: the function is g - h with h_i = max_k pieces[i][k], a
/// componentwise maximum of deterministic smooth convex pieces.  The
/// canonical majorant linearizes the lowest-index maximizing piece; the
/// enhanced solver enumerates epsilon-active pieces.
struct DcMaxSmoothTag {
    RandomVectorOracle g;
    std::vector<std::vector<SmoothPiece>> pieces;  ///< pieces[i] for component i
    double kappa0 = 0.0;
};

/// Structure tag: a concatenation of independently tagged sub-functions
/// (used by constraint penalization, which stacks inner blocks).
struct StackedTag {
    std::vector<RandomFn> parts;
};

using StructureTag = std::variant<SmoothTag, DcSmoothTag, DcMaxSmoothTag, StackedTag>;

/// A random inner function G or F of a compound problem: dimension, value
/// oracle, and the structure tag its majorants are built from.  dim_out may
/// be 0 (the function is absent).
struct RandomFn {
    int dim_out = 0;
    RandomVectorOracle fn;  ///< value (all components) and per-component subgradient
    StructureTag structure = SmoothTag{};

    bool absent() const { return dim_out == 0; }

    /// The absent function (dimension 0).
    static RandomFn none();

    /// A smooth random function with declared gradient-Lipschitz bound kappa0.
    static RandomFn smooth(int dim_out, RandomVectorOracle fn, double kappa0);

    /// g - h with both parts given by oracles; eval is derived from the parts.
    /// kappa0 declares a curvature bound for h (NaN = undeclared).
    static RandomFn dc_smooth(int dim_out, RandomVectorOracle g, RandomVectorOracle h,
                              double kappa0);

    /// g - max-of-smooth-pieces with deterministic pieces; eval derived.
    static RandomFn dc_max_smooth(int dim_out, RandomVectorOracle g,
                                  std::vector<std::vector<SmoothPiece>> pieces, double kappa0);

    /// Concatenation of parts (dimension = sum of part dimensions).
    static RandomFn stacked(std::vector<RandomFn> parts);
};

/// Largest declared curvature bound across a structure tag (NaN if any part
/// declares none).
double declared_kappa0(const RandomFn& fn);

}  // namespace smm
