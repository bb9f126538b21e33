#include "smm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "smm/majorant.hpp"
#include "smm/rng.hpp"

namespace smm {

namespace {

constexpr double kTol = 1e-8;

// A feasible probe point: Gaussian cloud around a feasible anchor, scaled to
// the set size, projected back onto the set.
Vec random_feasible(const FeasibleSet& X, const Vec& anchor, Rng& rng) {
    Vec y = anchor;
    double scale = X.diameter();
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
    for (auto& yi : y) yi += 0.5 * scale * rng.next_gauss();
    return X.project(y);
}

// Inner value vector u = (G(x,xi), F(x,xi)) fed to the phi components.
Vec inner_image(const CompoundProblem& p, const Vec& x, const Vec& xi) {
    Vec u;
    if (!p.G.absent()) u = p.G.fn.eval(x, xi);
    if (!p.F.absent()) {
        Vec vf = p.F.fn.eval(x, xi);
        u.insert(u.end(), vf.begin(), vf.end());
    }
    return u;
}

// Relative normalization for violation magnitudes.
double rel(double violation, double scale) { return violation / (1.0 + std::fabs(scale)); }

void bump(ContractCheck& c, double violation) {
    if (violation > c.worst_violation) c.worst_violation = violation;
}

struct SrStProbe {
    double worst = 0.0;
    bool any_undeclared = false;
};

// Componentwise check of fn(x,xi) + (kappa0/2)||x - c||^2 >= majorant(x; c, xi)
// with each stacked part judged against its own declared bound.
void sr_st_probe(const RandomFn& fn, const Vec& x, const Vec& center, const Vec& xi,
                 SrStProbe& out) {
    if (fn.absent()) return;
    if (const auto* st = std::get_if<StackedTag>(&fn.structure)) {
        for (const auto& part : st->parts) sr_st_probe(part, x, center, xi, out);
        return;
    }
    const double kappa0 = declared_kappa0(fn);
    if (std::isnan(kappa0)) {
        out.any_undeclared = true;
        return;
    }
    const Vec m = majorant_value(fn, x, center, xi);
    const Vec v = fn.fn.eval(x, xi);
    const double q = 0.5 * kappa0 * dist_sq(x, center);
    for (std::size_t i = 0; i < m.size(); ++i)
        out.worst = std::max(out.worst, rel(m[i] - v[i] - q, v[i]));
}

[[noreturn]] void structural_error(const std::string& what, std::size_t got,
                                   std::size_t expected) {
    std::ostringstream os;
    os << "validate_problem: " << what << " (got dimension " << got << ", expected " << expected
       << ")";
    throw std::invalid_argument(os.str());
}

}  // namespace

ValidationReport validate_problem(const CompoundProblem& p, int probe_count,
                                  std::uint64_t rng_seed) {
    if (probe_count < 1) throw std::invalid_argument("validate_problem: probe_count must be >= 1");
    if (p.inner_dim() <= 0)
        throw std::invalid_argument("validate_problem: G and F are both absent");
    if (p.outer.lphi() < 1) throw std::invalid_argument("validate_problem: outer map has no phi");

    const std::size_t l = static_cast<std::size_t>(p.inner_dim());
    const std::size_t lphi = static_cast<std::size_t>(p.outer.lphi());
    const std::size_t n = static_cast<std::size_t>(p.X.dim());

    Rng rng = Rng::derive(rng_seed, "validate");
    const Vec anchor = p.X.some_point();

    // --- structural gate: every oracle must produce/consume the declared
    // dimensions at one probe point ---
    {
        const Vec x0 = anchor;
        const Vec xi0 = p.xi_dist.draw(rng);
        if (static_cast<std::size_t>(p.xi_dist.dim()) != xi0.size())
            structural_error("distribution draw dimension", xi0.size(),
                             static_cast<std::size_t>(p.xi_dist.dim()));
        if (!p.G.absent()) {
            const Vec v = p.G.fn.eval(x0, xi0);
            if (v.size() != static_cast<std::size_t>(p.G.dim_out))
                structural_error("G value dimension", v.size(),
                                 static_cast<std::size_t>(p.G.dim_out));
            const Vec s = p.G.fn.subgrad(x0, xi0, 0);
            if (s.size() != n) structural_error("G subgradient dimension", s.size(), n);
        }
        if (!p.F.absent()) {
            const Vec v = p.F.fn.eval(x0, xi0);
            if (v.size() != static_cast<std::size_t>(p.F.dim_out))
                structural_error("F value dimension", v.size(),
                                 static_cast<std::size_t>(p.F.dim_out));
            const Vec s = p.F.fn.subgrad(x0, xi0, 0);
            if (s.size() != n) structural_error("F subgradient dimension", s.size(), n);
        }
        const Vec u0 = inner_image(p, x0, xi0);
        if (u0.size() != l) structural_error("inner value dimension", u0.size(), l);
        Vec w0(lphi);
        for (std::size_t j = 0; j < lphi; ++j) {
            w0[j] = p.outer.phi[j].eval(u0);
            const Vec s = p.outer.phi[j].subgrad(u0);
            if (s.size() != l) structural_error("phi subgradient dimension", s.size(), l);
        }
        (void)p.outer.psi.eval(w0);
        const Vec s = p.outer.psi.subgrad(w0);
        if (s.size() != lphi) structural_error("psi subgradient dimension", s.size(), lphi);
    }

    ContractCheck convexity{"convexity"};
    ContractCheck isotonicity{"isotonicity"};
    ContractCheck touching{"touching"};
    ContractCheck majorization{"majorization"};
    ContractCheck sr_st{"curvature-bound"};

    if (!p.outer.isotone) {
        isotonicity.skipped = true;
        isotonicity.note = "outer map not declared isotone";
    }

    SrStProbe sr;
    for (int probe = 0; probe < probe_count; ++probe) {
        const Vec x = random_feasible(p.X, anchor, rng);
        const Vec y = random_feasible(p.X, anchor, rng);
        const Vec center = random_feasible(p.X, anchor, rng);
        const Vec xi = p.xi_dist.draw(rng);
        const Vec xi2 = p.xi_dist.draw(rng);

        const Vec u = inner_image(p, x, xi);
        const Vec v = inner_image(p, y, xi2);
        const double lam = 0.25 + 0.5 * rng.next_unit();
        Vec umid(l);
        for (std::size_t i = 0; i < l; ++i) umid[i] = lam * u[i] + (1.0 - lam) * v[i];

        // Convexity and the subgradient inequality for each phi component.
        Vec wu(lphi), wv(lphi), wmid(lphi);
        for (std::size_t j = 0; j < lphi; ++j) {
            const auto& f = p.outer.phi[j];
            wu[j] = f.eval(u);
            wv[j] = f.eval(v);
            wmid[j] = f.eval(umid);
            bump(convexity, rel(wmid[j] - (lam * wu[j] + (1.0 - lam) * wv[j]), wu[j]));
            const Vec g = f.subgrad(u);
            double lin = wu[j];
            for (std::size_t i = 0; i < l; ++i) lin += g[i] * (v[i] - u[i]);
            bump(convexity, rel(lin - wv[j], wv[j]));
        }
        // Convexity of psi on the image segment (+ subgradient inequality).
        {
            Vec wm(lphi);
            for (std::size_t j = 0; j < lphi; ++j) wm[j] = lam * wu[j] + (1.0 - lam) * wv[j];
            const double pu = p.outer.psi.eval(wu);
            const double pv = p.outer.psi.eval(wv);
            const double pm = p.outer.psi.eval(wm);
            bump(convexity, rel(pm - (lam * pu + (1.0 - lam) * pv), pu));
            const Vec g = p.outer.psi.subgrad(wu);
            double lin = pu;
            for (std::size_t j = 0; j < lphi; ++j) lin += g[j] * (wv[j] - wu[j]);
            bump(convexity, rel(lin - pv, pv));
        }
        // Isotonicity on ordered pairs u <= u + r (r >= 0, random sparsity).
        if (!isotonicity.skipped) {
            Vec up = u;
            const double scale = 0.5 * (1.0 + max_abs(u));
            for (std::size_t i = 0; i < l; ++i)
                if (rng.next_unit() < 0.75) up[i] += scale * rng.next_unit();
            Vec wup(lphi);
            for (std::size_t j = 0; j < lphi; ++j) {
                wup[j] = p.outer.phi[j].eval(up);
                bump(isotonicity, rel(wu[j] - wup[j], wu[j]));
            }
            Vec wq = wu;
            const double wscale = 0.5 * (1.0 + max_abs(wu));
            for (std::size_t j = 0; j < lphi; ++j)
                if (rng.next_unit() < 0.75) wq[j] += wscale * rng.next_unit();
            bump(isotonicity, rel(p.outer.psi.eval(wu) - p.outer.psi.eval(wq),
                                  p.outer.psi.eval(wu)));
        }
        // Touching, majorization, convexity-in-x, and the curvature bound for
        // each present inner function's structure-implied majorant.
        for (const RandomFn* fnp : {&p.G, &p.F}) {
            const RandomFn& fn = *fnp;
            if (fn.absent()) continue;
            const Vec vc = fn.fn.eval(center, xi);
            const Vec mc = majorant_value(fn, center, center, xi);
            for (std::size_t i = 0; i < vc.size(); ++i)
                bump(touching, rel(std::fabs(mc[i] - vc[i]), vc[i]));

            const Vec vx = fn.fn.eval(x, xi);
            const Vec mx = majorant_value(fn, x, center, xi);
            for (std::size_t i = 0; i < vx.size(); ++i)
                bump(majorization, rel(vx[i] - mx[i], vx[i]));

            const Vec my = majorant_value(fn, y, center, xi);
            Vec xmid(n);
            for (std::size_t i = 0; i < n; ++i) xmid[i] = lam * x[i] + (1.0 - lam) * y[i];
            const Vec mmid = majorant_value(fn, xmid, center, xi);
            for (std::size_t i = 0; i < mx.size(); ++i)
                bump(convexity, rel(mmid[i] - (lam * mx[i] + (1.0 - lam) * my[i]), mx[i]));

            sr_st_probe(fn, x, center, xi, sr);
        }
    }

    bump(sr_st, sr.worst);
    if (sr.any_undeclared) {
        sr_st.skipped = true;
        sr_st.note = "no finite curvature bound declared for at least one part";
    }

    for (ContractCheck* c : {&convexity, &isotonicity, &touching, &majorization, &sr_st})
        c->passed = c->worst_violation <= kTol;

    ValidationReport report;
    report.checks = {convexity, isotonicity, touching, majorization, sr_st};
    return report;
}

namespace {

bool same_shape(const FeasibleSet& a, const FeasibleSet& b) {
    if (a.dim() != b.dim()) return false;
    if (a.kind().index() != b.kind().index()) return false;
    if (const auto* ba = std::get_if<BoxSet>(&a.kind())) {
        const auto* bb = std::get_if<BoxSet>(&b.kind());
        return ba->lo == bb->lo && ba->hi == bb->hi;
    }
    if (const auto* sa = std::get_if<SimplexSet>(&a.kind())) {
        const auto* sb = std::get_if<SimplexSet>(&b.kind());
        return sa->radius == sb->radius;
    }
    if (const auto* ca = std::get_if<BallSet>(&a.kind())) {
        const auto* cb = std::get_if<BallSet>(&b.kind());
        return ca->center == cb->center && ca->radius == cb->radius;
    }
    // Custom sets: projection oracles are opaque; dimensions matching is the
    // strongest structural comparison available.
    return true;
}

bool same_shape(const DistributionSpec& a, const DistributionSpec& b) {
    if (a.kind.index() != b.kind.index() || a.dim() != b.dim()) return false;
    if (const auto* ea = std::get_if<EmpiricalRows>(&a.kind)) {
        const auto* eb = std::get_if<EmpiricalRows>(&b.kind);
        return ea->rows == eb->rows;
    }
    if (const auto* ga = std::get_if<GaussianDiag>(&a.kind)) {
        const auto* gb = std::get_if<GaussianDiag>(&b.kind);
        return ga->mean == gb->mean && ga->variance == gb->variance;
    }
    if (const auto* ma = std::get_if<FiniteMixture>(&a.kind)) {
        const auto* mb = std::get_if<FiniteMixture>(&b.kind);
        if (ma->weights != mb->weights || ma->components.size() != mb->components.size())
            return false;
        for (std::size_t i = 0; i < ma->components.size(); ++i)
            if (!same_shape(ma->components[i], mb->components[i])) return false;
        return true;
    }
    const auto* pa = std::get_if<ProductBlocks>(&a.kind);
    const auto* pb = std::get_if<ProductBlocks>(&b.kind);
    if (pa->blocks.size() != pb->blocks.size()) return false;
    for (std::size_t i = 0; i < pa->blocks.size(); ++i)
        if (!same_shape(pa->blocks[i], pb->blocks[i])) return false;
    return true;
}

// Where each source problem's blocks land in the stacked compound.
struct BlockLayout {
    std::size_t g_ofs = 0, g_len = 0;      // within the stacked G output
    std::size_t f_ofs = 0, f_len = 0;      // within the stacked F output
    std::size_t phi_ofs = 0, phi_len = 0;  // within the stacked phi vector
};

}  // namespace

CompoundProblem penalize_constraints(const CompoundProblem& objective,
                                     const std::vector<CompoundProblem>& constraints,
                                     double rho_pen) {
    if (!(rho_pen > 0.0))
        throw std::invalid_argument("penalize_constraints: rho_pen must be positive");
    if (constraints.empty()) return objective;
    for (const auto& c : constraints) {
        if (!same_shape(objective.X, c.X))
            throw std::invalid_argument(
                "penalize_constraints: constraint feasible set differs from the objective's");
        if (!same_shape(objective.xi_dist, c.xi_dist))
            throw std::invalid_argument(
                "penalize_constraints: constraint sample distribution differs from the "
                "objective's");
    }

    std::vector<const CompoundProblem*> all;
    all.push_back(&objective);
    for (const auto& c : constraints) all.push_back(&c);

    std::vector<BlockLayout> layout(all.size());
    std::vector<RandomFn> g_parts, f_parts;
    std::size_t gtot = 0, ftot = 0, phitot = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const CompoundProblem& q = *all[i];
        layout[i].g_ofs = gtot;
        layout[i].g_len = static_cast<std::size_t>(q.lg());
        layout[i].f_ofs = ftot;
        layout[i].f_len = static_cast<std::size_t>(q.lf());
        layout[i].phi_ofs = phitot;
        layout[i].phi_len = static_cast<std::size_t>(q.outer.lphi());
        gtot += layout[i].g_len;
        ftot += layout[i].f_len;
        phitot += layout[i].phi_len;
        if (!q.G.absent()) g_parts.push_back(q.G);
        if (!q.F.absent()) f_parts.push_back(q.F);
    }

    CompoundProblem out;
    out.X = objective.X;
    out.xi_dist = objective.xi_dist;
    out.G = g_parts.empty() ? RandomFn::none()
                            : (g_parts.size() == 1 ? g_parts[0] : RandomFn::stacked(g_parts));
    out.F = f_parts.empty() ? RandomFn::none()
                            : (f_parts.size() == 1 ? f_parts[0] : RandomFn::stacked(f_parts));

    // Each source phi component reads its problem's own (G, F) sub-blocks of
    // the stacked inner vector (all G blocks first, then all F blocks).
    const std::size_t ltot = gtot + ftot;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const CompoundProblem& q = *all[i];
        const BlockLayout lay = layout[i];
        for (int j = 0; j < q.outer.lphi(); ++j) {
            ScalarOracle src = q.outer.phi[static_cast<std::size_t>(j)];
            auto slice = [lay, gtot](const Vec& u) {
                Vec s;
                s.reserve(lay.g_len + lay.f_len);
                for (std::size_t k = 0; k < lay.g_len; ++k) s.push_back(u[lay.g_ofs + k]);
                for (std::size_t k = 0; k < lay.f_len; ++k) s.push_back(u[gtot + lay.f_ofs + k]);
                return s;
            };
            ScalarOracle wrapped;
            wrapped.eval = [src, slice](const Vec& u) { return src.eval(slice(u)); };
            wrapped.subgrad = [src, slice, lay, gtot, ltot](const Vec& u) {
                const Vec gs = src.subgrad(slice(u));
                Vec out_g(ltot, 0.0);
                for (std::size_t k = 0; k < lay.g_len; ++k) out_g[lay.g_ofs + k] = gs[k];
                for (std::size_t k = 0; k < lay.f_len; ++k)
                    out_g[gtot + lay.f_ofs + k] = gs[lay.g_len + k];
                return out_g;
            };
            out.outer.phi.push_back(std::move(wrapped));
        }
    }

    // psi(y) = psi_0(y_block0) + rho_pen * sum_i max{psi_i(y_blocki), 0}.
    // At the hinge psi_i = 0 the lowest-index piece (the zero piece) is
    // selected, contributing nothing to the subgradient.
    std::vector<ScalarOracle> psis;
    psis.reserve(all.size());
    for (const auto* q : all) psis.push_back(q->outer.psi);
    const std::vector<BlockLayout> lay_copy = layout;
    out.outer.psi.eval = [psis, lay_copy, rho_pen](const Vec& y) {
        double total = 0.0;
        for (std::size_t i = 0; i < psis.size(); ++i) {
            Vec blk(y.begin() + static_cast<std::ptrdiff_t>(lay_copy[i].phi_ofs),
                    y.begin() + static_cast<std::ptrdiff_t>(lay_copy[i].phi_ofs +
                                                            lay_copy[i].phi_len));
            const double v = psis[i].eval(blk);
            total += (i == 0) ? v : rho_pen * std::max(v, 0.0);
        }
        return total;
    };
    out.outer.psi.subgrad = [psis, lay_copy, rho_pen](const Vec& y) {
        Vec g(y.size(), 0.0);
        for (std::size_t i = 0; i < psis.size(); ++i) {
            Vec blk(y.begin() + static_cast<std::ptrdiff_t>(lay_copy[i].phi_ofs),
                    y.begin() + static_cast<std::ptrdiff_t>(lay_copy[i].phi_ofs +
                                                            lay_copy[i].phi_len));
            double w = 1.0;
            if (i > 0) w = (psis[i].eval(blk) > 0.0) ? rho_pen : 0.0;
            if (w == 0.0) continue;
            const Vec gs = psis[i].subgrad(blk);
            for (std::size_t k = 0; k < gs.size(); ++k) g[lay_copy[i].phi_ofs + k] += w * gs[k];
        }
        return g;
    };
    out.outer.isotone = true;
    for (const auto* q : all) out.outer.isotone = out.outer.isotone && q->outer.isotone;
    out.outer.lip_psi = objective.outer.lip_psi;
    out.outer.lip_phi = objective.outer.lip_phi;
    for (const auto& c : constraints) {
        out.outer.lip_psi += rho_pen * c.outer.lip_psi;
        out.outer.lip_phi = std::max(out.outer.lip_phi, c.outer.lip_phi);
    }
    return out;
}

}  // namespace smm
