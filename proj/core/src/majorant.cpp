#include "smm/majorant.hpp"

#include <cmath>
#include <stdexcept>

namespace smm {

namespace {

// Index of the lowest-index maximizing piece of pieces[] at x.
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

}  // namespace

Vec majorant_value(const RandomFn& fn, const Vec& x, const Vec& center, const Vec& xi) {
    if (fn.absent()) return {};
    struct V {
        const RandomFn& fn;
        const Vec& x;
        const Vec& center;
        const Vec& xi;

        Vec operator()(const SmoothTag& t) const {
            Vec v = fn.fn.eval(x, xi);
            double q = 0.5 * t.kappa0 * dist_sq(x, center);
            for (double& vi : v) vi += q;
            return v;
        }
        Vec operator()(const DcSmoothTag& t) const {
            Vec v = t.g.eval(x, xi);
            Vec hc = t.h.eval(center, xi);
            if (hc.size() != v.size())
                throw std::runtime_error("majorant: g and h disagree on output dimension");
            for (std::size_t i = 0; i < v.size(); ++i) {
                Vec a = t.h.subgrad(center, xi, static_cast<int>(i));
                double lin = 0.0;
                for (std::size_t j = 0; j < a.size(); ++j) lin += a[j] * (x[j] - center[j]);
                v[i] -= hc[i] + lin;
            }
            return v;
        }
        Vec operator()(const DcMaxSmoothTag& t) const {
            Vec v = t.g.eval(x, xi);
            for (std::size_t i = 0; i < v.size(); ++i) {
                const auto& pl = t.pieces[i];
                std::size_t k = argmax_piece(pl, center);
                double hc = pl[k].eval(center);
                Vec a = pl[k].grad(center);
                double lin = 0.0;
                for (std::size_t j = 0; j < a.size(); ++j) lin += a[j] * (x[j] - center[j]);
                v[i] -= hc + lin;
            }
            return v;
        }
        Vec operator()(const StackedTag& t) const {
            Vec out;
            for (const auto& part : t.parts) {
                Vec v = majorant_value(part, x, center, xi);
                out.insert(out.end(), v.begin(), v.end());
            }
            return out;
        }
    };
    return std::visit(V{fn, x, center, xi}, fn.structure);
}

Vec majorant_subgrad(const RandomFn& fn, const Vec& x, const Vec& center, const Vec& xi,
                     int comp) {
    if (fn.absent()) throw std::invalid_argument("majorant_subgrad: function is absent");
    struct V {
        const RandomFn& fn;
        const Vec& x;
        const Vec& center;
        const Vec& xi;
        int comp;

        Vec operator()(const SmoothTag& t) const {
            Vec s = fn.fn.subgrad(x, xi, comp);
            for (std::size_t j = 0; j < s.size(); ++j) s[j] += t.kappa0 * (x[j] - center[j]);
            return s;
        }
        Vec operator()(const DcSmoothTag& t) const {
            Vec s = t.g.subgrad(x, xi, comp);
            Vec a = t.h.subgrad(center, xi, comp);
            for (std::size_t j = 0; j < s.size(); ++j) s[j] -= a[j];
            return s;
        }
        Vec operator()(const DcMaxSmoothTag& t) const {
            Vec s = t.g.subgrad(x, xi, comp);
            const auto& pl = t.pieces[static_cast<std::size_t>(comp)];
            Vec a = pl[argmax_piece(pl, center)].grad(center);
            for (std::size_t j = 0; j < s.size(); ++j) s[j] -= a[j];
            return s;
        }
        Vec operator()(const StackedTag& t) const {
            int c = comp;
            for (const auto& part : t.parts) {
                if (c < part.dim_out) return majorant_subgrad(part, x, center, xi, c);
                c -= part.dim_out;
            }
            throw std::out_of_range("majorant_subgrad: component out of range");
        }
    };
    return std::visit(V{fn, x, center, xi, comp}, fn.structure);
}

}  // namespace smm
