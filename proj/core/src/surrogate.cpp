#include "smm/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace smm {

double LinearizedPiece::value(const Vec& x) const {
    double v = raw_value(x);
    if (quad_kappa != 0.0) v += 0.5 * quad_kappa * dist_sq(x, base);
    v -= drop_c;
    if (!drop_a.empty()) {
        double lin = 0.0;
        for (std::size_t j = 0; j < drop_a.size(); ++j) lin += drop_a[j] * (x[j] - base[j]);
        v -= lin;
    }
    return v;
}

Vec LinearizedPiece::subgrad(const Vec& x) const {
    Vec g = raw_subgrad(x);
    if (quad_kappa != 0.0)
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += quad_kappa * (x[j] - base[j]);
    if (!drop_a.empty())
        for (std::size_t j = 0; j < g.size(); ++j) g[j] -= drop_a[j];
    return g;
}

namespace {

std::size_t argmax_piece(const std::vector<SmoothPiece>& pieces, const Vec& x) {
    std::size_t best = 0;
    double bestv = pieces[0].eval(x);
    for (std::size_t k = 1; k < pieces.size(); ++k) {
        double v = pieces[k].eval(x);
        if (v > bestv) {
            bestv = v;
            best = k;
        }
    }
    return best;
}

LinearizedPiece component_piece(const RandomVectorOracle& raw, const Vec& base, const Vec& xi,
                                int comp, double quad_kappa, double drop_c, Vec drop_a) {
    LinearizedPiece p;
    p.base = base;
    p.xi = xi;
    RandomVectorOracle rc = raw;
    Vec xic = xi;
    p.raw_value = [rc, xic, comp](const Vec& x) {
        return rc.eval(x, xic).at(static_cast<std::size_t>(comp));
    };
    p.raw_subgrad = [rc, xic, comp](const Vec& x) { return rc.subgrad(x, xic, comp); };
    p.quad_kappa = quad_kappa;
    p.drop_c = drop_c;
    p.drop_a = std::move(drop_a);
    return p;
}

}  // namespace

std::vector<LinearizedPiece> build_smooth_surrogate(const RandomFn& fn, const Vec& x_base,
                                                    const Vec& xi) {
    const auto* tag = std::get_if<SmoothTag>(&fn.structure);
    if (!tag) throw std::invalid_argument("build_smooth_surrogate: function is not smooth-tagged");
    std::vector<LinearizedPiece> out;
    out.reserve(static_cast<std::size_t>(fn.dim_out));
    for (int i = 0; i < fn.dim_out; ++i)
        out.push_back(component_piece(fn.fn, x_base, xi, i, tag->kappa0, 0.0, {}));
    return out;
}

std::vector<LinearizedPiece> build_dc_surrogate(const RandomFn& fn, const Vec& x_base,
                                                const Vec& xi) {
    std::vector<LinearizedPiece> out;
    out.reserve(static_cast<std::size_t>(fn.dim_out));
    if (const auto* tag = std::get_if<DcSmoothTag>(&fn.structure)) {
        const Vec hc = tag->h.eval(x_base, xi);
        for (int i = 0; i < fn.dim_out; ++i) {
            Vec a = tag->h.subgrad(x_base, xi, i);
            out.push_back(component_piece(tag->g, x_base, xi, i, 0.0,
                                          hc.at(static_cast<std::size_t>(i)), std::move(a)));
        }
        return out;
    }
    if (const auto* tag = std::get_if<DcMaxSmoothTag>(&fn.structure)) {
        for (int i = 0; i < fn.dim_out; ++i) {
            const auto& pl = tag->pieces[static_cast<std::size_t>(i)];
            const std::size_t k = argmax_piece(pl, x_base);
            out.push_back(component_piece(tag->g, x_base, xi, i, 0.0, pl[k].eval(x_base),
                                          pl[k].grad(x_base)));
        }
        return out;
    }
    throw std::invalid_argument("build_dc_surrogate: function is not dc-tagged");
}

double default_active_eps(const std::vector<SmoothPiece>& pieces, const Vec& base) {
    double m = pieces[0].eval(base);
    for (std::size_t k = 1; k < pieces.size(); ++k) m = std::max(m, pieces[k].eval(base));
    return 1e-6 * (1.0 + std::fabs(m));
}

std::vector<int> eps_active_pieces(const std::vector<SmoothPiece>& pieces, const Vec& base,
                                   double eps) {
    if (std::isnan(eps)) throw std::invalid_argument("eps_active_pieces: eps must not be NaN");
    double m = pieces[0].eval(base);
    for (std::size_t k = 1; k < pieces.size(); ++k) m = std::max(m, pieces[k].eval(base));
    const double e = eps < 0.0 ? default_active_eps(pieces, base) : eps;
    std::vector<int> idx;
    for (std::size_t k = 0; k < pieces.size(); ++k)
        if (pieces[k].eval(base) >= m - e) idx.push_back(static_cast<int>(k));
    return idx;
}

std::vector<std::vector<LinearizedPiece>> build_maxsmooth_surrogate(const RandomFn& fn,
                                                                    const Vec& x_base,
                                                                    const Vec& xi, double eps) {
    const auto* tag = std::get_if<DcMaxSmoothTag>(&fn.structure);
    if (!tag)
        throw std::invalid_argument("build_maxsmooth_surrogate: function is not max-smooth");
    std::vector<std::vector<LinearizedPiece>> out(static_cast<std::size_t>(fn.dim_out));
    for (int i = 0; i < fn.dim_out; ++i) {
        const auto& pl = tag->pieces[static_cast<std::size_t>(i)];
        const double e = eps < 0.0 ? default_active_eps(pl, x_base) : eps;
        for (int k : eps_active_pieces(pl, x_base, e))
            out[static_cast<std::size_t>(i)].push_back(
                component_piece(tag->g, x_base, xi, i, 0.0,
                                pl[static_cast<std::size_t>(k)].eval(x_base),
                                pl[static_cast<std::size_t>(k)].grad(x_base)));
    }
    return out;
}

namespace {

// Collect per-component active sets of a function's max-smooth leaves into
// `out` (indexed by block component); non-max components stay empty.
void collect_active(const RandomFn& fn, const Vec& base, double eps, std::size_t ofs,
                    std::vector<std::vector<int>>& out) {
    if (fn.absent()) return;
    if (const auto* st = std::get_if<StackedTag>(&fn.structure)) {
        std::size_t o = ofs;
        for (const auto& part : st->parts) {
            collect_active(part, base, eps, o, out);
            o += static_cast<std::size_t>(part.dim_out);
        }
        return;
    }
    if (const auto* tag = std::get_if<DcMaxSmoothTag>(&fn.structure)) {
        for (int i = 0; i < fn.dim_out; ++i) {
            const auto& pl = tag->pieces[static_cast<std::size_t>(i)];
            const double e = eps < 0.0 ? default_active_eps(pl, base) : eps;
            out[ofs + static_cast<std::size_t>(i)] = eps_active_pieces(pl, base, e);
        }
    }
}

}  // namespace

EpsActiveSet eps_active_sets(const CompoundProblem& p, const Vec& base, double eps) {
    EpsActiveSet s;
    s.epsilon = eps;
    s.g_active.assign(static_cast<std::size_t>(p.lg()), {});
    s.f_active.assign(static_cast<std::size_t>(p.lf()), {});
    collect_active(p.G, base, eps, 0, s.g_active);
    collect_active(p.F, base, eps, 0, s.f_active);
    return s;
}

namespace {

// Append the leaf plans of `fn` (a G- or F-block) to `leaves`, precomputing
// per-sample drops at the anchor.  `pick` (optional) overrides the max-smooth
// piece selection per block component; -1 falls back to the canonical
// lowest-index argmax.
void add_leaves(const RandomFn& fn, bool in_g, std::size_t ofs, const Vec& base,
                const std::vector<Vec>& rows, const std::vector<int>* pick,
                std::vector<SurrogateModel::Leaf>& leaves) {
    if (fn.absent()) return;
    if (const auto* st = std::get_if<StackedTag>(&fn.structure)) {
        std::size_t o = ofs;
        for (const auto& part : st->parts) {
            add_leaves(part, in_g, o, base, rows, pick, leaves);
            o += static_cast<std::size_t>(part.dim_out);
        }
        return;
    }
    SurrogateModel::Leaf leaf;
    leaf.dim = fn.dim_out;
    leaf.ofs = ofs;
    leaf.in_g = in_g;
    if (const auto* tag = std::get_if<SmoothTag>(&fn.structure)) {
        leaf.raw = fn.fn;
        leaf.quad_kappa = tag->kappa0;
    } else if (const auto* tag = std::get_if<DcSmoothTag>(&fn.structure)) {
        leaf.raw = tag->g;
        leaf.has_drop = true;
        leaf.drop_per_sample = true;
        leaf.drop_c.reserve(rows.size());
        leaf.drop_a.reserve(rows.size());
        for (const Vec& row : rows) {
            Vec c = tag->h.eval(base, row);
            if (c.size() != static_cast<std::size_t>(fn.dim_out))
                throw std::runtime_error("surrogate build: concave-part dimension mismatch");
            std::vector<Vec> slopes;
            slopes.reserve(static_cast<std::size_t>(fn.dim_out));
            for (int i = 0; i < fn.dim_out; ++i) slopes.push_back(tag->h.subgrad(base, row, i));
            leaf.drop_c.push_back(std::move(c));
            leaf.drop_a.push_back(std::move(slopes));
        }
    } else {
        const auto& mtag = std::get<DcMaxSmoothTag>(fn.structure);
        leaf.raw = mtag.g;
        leaf.has_drop = true;
        leaf.drop_per_sample = false;
        Vec c(static_cast<std::size_t>(fn.dim_out));
        std::vector<Vec> slopes(static_cast<std::size_t>(fn.dim_out));
        for (int i = 0; i < fn.dim_out; ++i) {
            const auto& pl = mtag.pieces[static_cast<std::size_t>(i)];
            std::size_t k;
            const int chosen =
                pick ? (*pick).at(ofs + static_cast<std::size_t>(i)) : -1;
            if (chosen >= 0) {
                if (chosen >= static_cast<int>(pl.size()))
                    throw std::invalid_argument("surrogate build: piece pick out of range");
                k = static_cast<std::size_t>(chosen);
            } else {
                k = argmax_piece(pl, base);
            }
            c[static_cast<std::size_t>(i)] = pl[k].eval(base);
            slopes[static_cast<std::size_t>(i)] = pl[k].grad(base);
        }
        leaf.drop_c.push_back(std::move(c));
        leaf.drop_a.push_back(std::move(slopes));
    }
    leaves.push_back(std::move(leaf));
}

SurrogateModel build_model_impl(const CompoundProblem& p, const Vec& base,
                                const SampleBatch& xi_batch, const SampleBatch& eta_batch,
                                const std::vector<int>* g_pick, const std::vector<int>* f_pick) {
    if (p.inner_dim() <= 0)
        throw std::invalid_argument("build_surrogate_model: G and F are both absent");
    if (base.size() != static_cast<std::size_t>(p.X.dim()))
        throw std::invalid_argument("build_surrogate_model: base dimension mismatch");
    if (!p.G.absent() && xi_batch.empty())
        throw std::invalid_argument("build_surrogate_model: xi batch is empty");
    if (!p.F.absent() && eta_batch.empty())
        throw std::invalid_argument("build_surrogate_model: eta batch is empty");
    SurrogateModel m;
    m.base = base;
    m.xi_batch = xi_batch;
    m.eta_batch = eta_batch;
    m.outer = p.outer;
    m.lg = p.lg();
    m.lf = p.lf();
    add_leaves(p.G, true, 0, base, xi_batch.rows, g_pick, m.leaves);
    add_leaves(p.F, false, 0, base, eta_batch.rows, f_pick, m.leaves);
    return m;
}

}  // namespace

SurrogateModel build_surrogate_model(const CompoundProblem& p, const Vec& base,
                                     const SampleBatch& xi_batch,
                                     const SampleBatch& eta_batch) {
    return build_model_impl(p, base, xi_batch, eta_batch, nullptr, nullptr);
}

SurrogateModel build_surrogate_model(const CompoundProblem& p, const Vec& base,
                                     const SampleBatch& xi_batch, const SampleBatch& eta_batch,
                                     const std::vector<int>& g_pick,
                                     const std::vector<int>& f_pick) {
    return build_model_impl(p, base, xi_batch, eta_batch, &g_pick, &f_pick);
}

void set_prox(SurrogateModel& m, Vec center, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("set_prox: rho must be positive");
    if (center.size() != m.base.size())
        throw std::invalid_argument("set_prox: center dimension mismatch");
    m.prox_set = true;
    m.prox_center = std::move(center);
    m.rho = rho;
}

namespace {

// Shared evaluation core.  Computes the surrogate value at x; when
// `subgrad_out` is non-null, also assembles a valid subgradient by the
// isotone convex chain rule.  Reductions are left-to-right in sample order so
// repeated evaluations are bit-identical.
double eval_core(const SurrogateModel& m, const Vec& x, Vec* subgrad_out) {
    if (x.size() != m.base.size())
        throw std::invalid_argument("surrogate evaluation: dimension mismatch");
    const std::size_t lg = static_cast<std::size_t>(m.lg);
    const std::size_t lf = static_cast<std::size_t>(m.lf);
    const std::size_t lphi = m.outer.phi.size();
    const std::size_t nvar = x.size();
    const double d2 = dist_sq(x, m.base);

    // Inner block: fbar_hat = (1/m) sum_s Fhat^s(x).
    Vec fbar(lf, 0.0);
    const std::size_t n_eta = m.eta_batch.size();
    for (const auto& leaf : m.leaves) {
        if (leaf.in_g) continue;
        for (std::size_t s = 0; s < n_eta; ++s) {
            const Vec raw = leaf.raw.eval(x, m.eta_batch.rows[s]);
            const std::size_t di = leaf.drop_per_sample ? s : 0;
            for (int i = 0; i < leaf.dim; ++i) {
                double v = raw[static_cast<std::size_t>(i)];
                if (leaf.quad_kappa != 0.0) v += 0.5 * leaf.quad_kappa * d2;
                if (leaf.has_drop) {
                    const Vec& a = leaf.drop_a[di][static_cast<std::size_t>(i)];
                    double lin = 0.0;
                    for (std::size_t j = 0; j < nvar; ++j) lin += a[j] * (x[j] - m.base[j]);
                    v -= leaf.drop_c[di][static_cast<std::size_t>(i)] + lin;
                }
                fbar[leaf.ofs + static_cast<std::size_t>(i)] += v;
            }
        }
    }
    if (lf > 0) {
        const double inv_m = 1.0 / static_cast<double>(n_eta);
        for (double& v : fbar) v *= inv_m;
    }

    // Outer block: w = (1/n) sum_t phi(Ghat^t(x), fbar_hat).
    const std::size_t n_xi = (lg > 0) ? m.xi_batch.size() : 1;
    Vec w(lphi, 0.0);
    Vec u(lg + lf);
    std::vector<Vec> u_store;
    if (subgrad_out) u_store.reserve(n_xi);
    for (std::size_t t = 0; t < n_xi; ++t) {
        for (const auto& leaf : m.leaves) {
            if (!leaf.in_g) continue;
            const Vec raw = leaf.raw.eval(x, m.xi_batch.rows[t]);
            const std::size_t di = leaf.drop_per_sample ? t : 0;
            for (int i = 0; i < leaf.dim; ++i) {
                double v = raw[static_cast<std::size_t>(i)];
                if (leaf.quad_kappa != 0.0) v += 0.5 * leaf.quad_kappa * d2;
                if (leaf.has_drop) {
                    const Vec& a = leaf.drop_a[di][static_cast<std::size_t>(i)];
                    double lin = 0.0;
                    for (std::size_t j = 0; j < nvar; ++j) lin += a[j] * (x[j] - m.base[j]);
                    v -= leaf.drop_c[di][static_cast<std::size_t>(i)] + lin;
                }
                u[leaf.ofs + static_cast<std::size_t>(i)] = v;
            }
        }
        for (std::size_t i = 0; i < lf; ++i) u[lg + i] = fbar[i];
        for (std::size_t j = 0; j < lphi; ++j) w[j] += m.outer.phi[j].eval(u);
        if (subgrad_out) u_store.push_back(u);
    }
    const double inv_n = 1.0 / static_cast<double>(n_xi);
    for (double& v : w) v *= inv_n;

    double value = m.outer.psi.eval(w);
    if (m.prox_set) value += (0.5 / m.rho) * dist_sq(x, m.prox_center);
    if (!subgrad_out) return value;

    // Chain rule: d psi composed with the per-sample phi subgradients; the
    // G-part weights are per (sample, component), the F-part weights sum over
    // samples because fbar_hat is shared across them.
    Vec& gout = *subgrad_out;
    gout.assign(nvar, 0.0);
    const Vec spsi = m.outer.psi.subgrad(w);
    Vec wt(lg);
    Vec wf(lf, 0.0);
    for (std::size_t t = 0; t < n_xi; ++t) {
        std::fill(wt.begin(), wt.end(), 0.0);
        for (std::size_t j = 0; j < lphi; ++j) {
            if (spsi[j] == 0.0) continue;
            const Vec sphi = m.outer.phi[j].subgrad(u_store[t]);
            for (std::size_t i = 0; i < lg; ++i) wt[i] += spsi[j] * sphi[i];
            for (std::size_t i = 0; i < lf; ++i) wf[i] += spsi[j] * sphi[lg + i];
        }
        // G-part: weight/n times the majorant subgradient of component i.
        for (const auto& leaf : m.leaves) {
            if (!leaf.in_g) continue;
            const std::size_t di = leaf.drop_per_sample ? t : 0;
            for (int i = 0; i < leaf.dim; ++i) {
                const double wgt = wt[leaf.ofs + static_cast<std::size_t>(i)] * inv_n;
                if (wgt == 0.0) continue;
                Vec s = leaf.raw.subgrad(x, m.xi_batch.rows[t], i);
                if (leaf.quad_kappa != 0.0)
                    for (std::size_t j = 0; j < nvar; ++j)
                        s[j] += leaf.quad_kappa * (x[j] - m.base[j]);
                if (leaf.has_drop) {
                    const Vec& a = leaf.drop_a[di][static_cast<std::size_t>(i)];
                    for (std::size_t j = 0; j < nvar; ++j) s[j] -= a[j];
                }
                axpy(wgt, s, gout);
            }
        }
    }
    // F-part: aggregated weight times (1/m) sum_s of the per-sample majorant
    // subgradients.
    if (lf > 0) {
        const double inv_m = 1.0 / static_cast<double>(n_eta);
        for (const auto& leaf : m.leaves) {
            if (leaf.in_g) continue;
            for (int i = 0; i < leaf.dim; ++i) {
                const double wgt = wf[leaf.ofs + static_cast<std::size_t>(i)] * inv_n * inv_m;
                if (wgt == 0.0) continue;
                for (std::size_t s = 0; s < n_eta; ++s) {
                    Vec sv = leaf.raw.subgrad(x, m.eta_batch.rows[s], i);
                    if (leaf.quad_kappa != 0.0)
                        for (std::size_t j = 0; j < nvar; ++j)
                            sv[j] += leaf.quad_kappa * (x[j] - m.base[j]);
                    if (leaf.has_drop) {
                        const std::size_t di = leaf.drop_per_sample ? s : 0;
                        const Vec& a = leaf.drop_a[di][static_cast<std::size_t>(i)];
                        for (std::size_t j = 0; j < nvar; ++j) sv[j] -= a[j];
                    }
                    axpy(wgt, sv, gout);
                }
            }
        }
    }
    if (m.prox_set)
        for (std::size_t j = 0; j < nvar; ++j)
            gout[j] += (x[j] - m.prox_center[j]) / m.rho;
    return value;
}

}  // namespace

double surrogate_value(const SurrogateModel& m, const Vec& x) { return eval_core(m, x, nullptr); }

ValueSubgrad surrogate_value_subgrad(const SurrogateModel& m, const Vec& x) {
    ValueSubgrad vs;
    vs.value = eval_core(m, x, &vs.subgrad);
    return vs;
}

TupleEnumeration enumerate_active_tuples(const CompoundProblem& p, const Vec& base, double eps,
                                         int cap) {
    if (cap < 1) throw std::invalid_argument("enumerate_active_tuples: cap must be >= 1");
    const EpsActiveSet act = eps_active_sets(p, base, eps);

    struct Slot {
        bool in_g;
        std::size_t comp;
        const std::vector<int>* active;
    };
    std::vector<Slot> slots;
    for (std::size_t i = 0; i < act.g_active.size(); ++i)
        if (!act.g_active[i].empty()) slots.push_back({true, i, &act.g_active[i]});
    for (std::size_t i = 0; i < act.f_active.size(); ++i)
        if (!act.f_active[i].empty()) slots.push_back({false, i, &act.f_active[i]});

    long long count = 1;
    for (const auto& s : slots) {
        count *= static_cast<long long>(s.active->size());
        if (count > cap)
            throw std::invalid_argument(
                "enumerate_active_tuples: active-tuple count exceeds the cap; use a smaller "
                "eps or a larger cap");
    }

    TupleEnumeration out;
    std::vector<std::size_t> cursor(slots.size(), 0);
    const std::vector<int> g0(static_cast<std::size_t>(p.lg()), -1);
    const std::vector<int> f0(static_cast<std::size_t>(p.lf()), -1);
    for (long long tup = 0; tup < count; ++tup) {
        std::vector<int> g = g0, f = f0;
        for (std::size_t si = 0; si < slots.size(); ++si) {
            const int pick = (*slots[si].active)[cursor[si]];
            if (slots[si].in_g)
                g[slots[si].comp] = pick;
            else
                f[slots[si].comp] = pick;
        }
        out.g_picks.push_back(std::move(g));
        out.f_picks.push_back(std::move(f));
        // Advance the mixed-radix cursor, last slot fastest, so tuples come
        // out in lexicographic order.
        for (std::size_t si = slots.size(); si-- > 0;) {
            if (++cursor[si] < slots[si].active->size()) break;
            cursor[si] = 0;
        }
    }
    return out;
}

}  // namespace smm
