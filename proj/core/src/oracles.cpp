#include "smm/oracles.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace smm {

OuterMap identity_psi(ScalarOracle phi1, double lip_phi) {
    OuterMap m;
    m.psi.eval = [](const Vec& y) { return y.at(0); };
    m.psi.subgrad = [](const Vec& y) {
        Vec s(y.size(), 0.0);
        if (!y.empty()) s[0] = 1.0;
        return s;
    };
    m.phi.push_back(std::move(phi1));
    m.lip_psi = 1.0;
    m.lip_phi = lip_phi;
    return m;
}

RandomFn RandomFn::none() { return RandomFn{}; }

RandomFn RandomFn::smooth(int dim_out, RandomVectorOracle fn, double kappa0) {
    if (dim_out <= 0) throw std::invalid_argument("RandomFn::smooth: dim_out must be positive");
    if (!fn.eval || !fn.subgrad)
        throw std::invalid_argument("RandomFn::smooth: both oracles are required");
    if (!(kappa0 >= 0.0)) throw std::invalid_argument("RandomFn::smooth: kappa0 must be >= 0");
    RandomFn f;
    f.dim_out = dim_out;
    f.fn = std::move(fn);
    f.structure = SmoothTag{kappa0};
    return f;
}

RandomFn RandomFn::dc_smooth(int dim_out, RandomVectorOracle g, RandomVectorOracle h,
                             double kappa0) {
    if (dim_out <= 0) throw std::invalid_argument("RandomFn::dc_smooth: dim_out must be positive");
    if (!g.eval || !g.subgrad || !h.eval || !h.subgrad)
        throw std::invalid_argument("RandomFn::dc_smooth: all four oracles are required");
    RandomFn f;
    f.dim_out = dim_out;
    RandomVectorOracle gc = g;  // copies captured by the derived value oracle
    RandomVectorOracle hc = h;
    f.fn.eval = [gc, hc](const Vec& x, const Vec& xi) {
        Vec v = gc.eval(x, xi);
        Vec w = hc.eval(x, xi);
        if (w.size() != v.size())
            throw std::runtime_error("dc_smooth: g and h disagree on output dimension");
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= w[i];
        return v;
    };
    f.fn.subgrad = [gc, hc](const Vec& x, const Vec& xi, int comp) {
        Vec s = gc.subgrad(x, xi, comp);
        Vec t = hc.subgrad(x, xi, comp);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] -= t[i];
        return s;
    };
    f.structure = DcSmoothTag{std::move(g), std::move(h), kappa0};
    return f;
}

RandomFn RandomFn::dc_max_smooth(int dim_out, RandomVectorOracle g,
                                 std::vector<std::vector<SmoothPiece>> pieces, double kappa0) {
    if (dim_out <= 0)
        throw std::invalid_argument("RandomFn::dc_max_smooth: dim_out must be positive");
    if (static_cast<int>(pieces.size()) != dim_out)
        throw std::invalid_argument("RandomFn::dc_max_smooth: need one piece list per component");
    for (const auto& pl : pieces) {
        if (pl.empty())
            throw std::invalid_argument("RandomFn::dc_max_smooth: empty piece list");
        for (const auto& p : pl)
            if (!p.eval || !p.grad)
                throw std::invalid_argument("RandomFn::dc_max_smooth: piece oracles are required");
    }
    if (!g.eval || !g.subgrad)
        throw std::invalid_argument("RandomFn::dc_max_smooth: g oracles are required");
    RandomFn f;
    f.dim_out = dim_out;
    RandomVectorOracle gc = g;
    auto pc = pieces;
    f.fn.eval = [gc, pc](const Vec& x, const Vec& xi) {
        Vec v = gc.eval(x, xi);
        for (std::size_t i = 0; i < v.size(); ++i) {
            double m = pc[i][0].eval(x);
            for (std::size_t k = 1; k < pc[i].size(); ++k) m = std::max(m, pc[i][k].eval(x));
            v[i] -= m;
        }
        return v;
    };
    f.fn.subgrad = [gc, pc](const Vec& x, const Vec& xi, int comp) {
        Vec s = gc.subgrad(x, xi, comp);
        // Subtract the gradient of the lowest-index maximizing piece so ties
        // resolve deterministically.
        const auto& pl = pc.at(static_cast<std::size_t>(comp));
        std::size_t best = 0;
        double bestv = pl[0].eval(x);
        for (std::size_t k = 1; k < pl.size(); ++k) {
            double v = pl[k].eval(x);
            if (v > bestv) {
                bestv = v;
                best = k;
            }
        }
        Vec gmax = pl[best].grad(x);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] -= gmax[i];
        return s;
    };
    f.structure = DcMaxSmoothTag{std::move(g), std::move(pieces), kappa0};
    return f;
}

RandomFn RandomFn::stacked(std::vector<RandomFn> parts) {
    if (parts.empty()) throw std::invalid_argument("RandomFn::stacked: no parts");
    int d = 0;
    for (const auto& p : parts) {
        if (p.absent()) throw std::invalid_argument("RandomFn::stacked: absent part");
        d += p.dim_out;
    }
    RandomFn f;
    f.dim_out = d;
    auto pc = parts;
    f.fn.eval = [pc](const Vec& x, const Vec& xi) {
        Vec out;
        for (const auto& p : pc) {
            Vec v = p.fn.eval(x, xi);
            out.insert(out.end(), v.begin(), v.end());
        }
        return out;
    };
    f.fn.subgrad = [pc](const Vec& x, const Vec& xi, int comp) {
        int c = comp;
        for (const auto& p : pc) {
            if (c < p.dim_out) return p.fn.subgrad(x, xi, c);
            c -= p.dim_out;
        }
        throw std::out_of_range("stacked subgrad: component out of range");
    };
    f.structure = StackedTag{std::move(parts)};
    return f;
}

double declared_kappa0(const RandomFn& fn) {
    if (fn.absent()) return 0.0;
    struct V {
        double operator()(const SmoothTag& t) const { return t.kappa0; }
        double operator()(const DcSmoothTag& t) const { return t.kappa0; }
        double operator()(const DcMaxSmoothTag& t) const { return t.kappa0; }
        double operator()(const StackedTag& t) const {
            double m = 0.0;
            for (const auto& p : t.parts) {
                double k = declared_kappa0(p);
                if (std::isnan(k)) return std::numeric_limits<double>::quiet_NaN();
                m = std::max(m, k);
            }
            return m;
        }
    };
    return std::visit(V{}, fn.structure);
}

}  // namespace smm
