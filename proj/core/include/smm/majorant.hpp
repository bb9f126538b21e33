#pragma once

#include "smm/oracles.hpp"
#include "smm/vec.hpp"

namespace smm {

/// Value of the canonical per-sample convex majorant of `fn` anchored at
/// `center`, evaluated at `x` for the sample `xi`.  The majorant touches the
/// function at the anchor, lies above it everywhere on the anchor's
/// structure-specific certificate, and is convex in `x`:
///   - smooth:        fn(x, xi) + (kappa0/2) ||x - center||^2
///   - dc:            g(x, xi) - h(center, xi) - a(center)^T (x - center),  a in dh
///   - dc-max-smooth: as dc with h = max of deterministic pieces, linearizing
///                    the lowest-index maximizing piece at the anchor
/// Ties and kinks resolve to the lowest-index piece, so results are
/// deterministic.
Vec majorant_value(const RandomFn& fn, const Vec& x, const Vec& center, const Vec& xi);

/// Subgradient (in x) of component `comp` of the same majorant.
Vec majorant_subgrad(const RandomFn& fn, const Vec& x, const Vec& center, const Vec& xi,
                     int comp);

}  // namespace smm
