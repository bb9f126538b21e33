#include "smm/subsolver.hpp"

#include <cmath>
#include <stdexcept>

namespace smm {

namespace {

// ||x - P_X(x - rho g)||^2 / rho: the strong-convexity gap certificate with
// its documented constant c_cert = 2 folded in.
double residual_certificate(const FeasibleSet& X, const Vec& x, const Vec& g, double rho) {
    Vec y = x;
    axpy(-rho, g, y);
    return dist_sq(x, X.project(y)) / rho;
}

}  // namespace

SubsolveResult solve_prox(const SurrogateModel& model, const FeasibleSet& X,
                          const SubsolverConfig& cfg, double delta, const Vec& x_start) {
    if (!model.prox_set)
        throw std::invalid_argument("solve_prox: model has no prox term attached");
    if (!(delta > 0.0)) throw std::invalid_argument("solve_prox: delta must be positive");
    const double rho = model.rho;

    SubsolveResult res;
    int evals = 0;
    const auto eval_vs = [&](const Vec& pt) {
        ++evals;
        return surrogate_value_subgrad(model, pt);
    };
    const auto eval_v = [&](const Vec& pt) {
        ++evals;
        return surrogate_value(model, pt);
    };
    const auto finish = [&](Vec x, double value, double gap) {
        res.x_out = std::move(x);
        res.value = value;
        res.certified_gap = gap;
        res.iters_used = evals;
        res.certified = gap <= delta;
        return res;
    };

    Vec x = X.project(x_start);
    ValueSubgrad vs = eval_vs(x);
    Vec best_x = x;
    double best_v = vs.value;

    double gmax_sq = 0.0;    // largest observed subgradient norm^2
    long long t_sub = 0;     // subgradient step count
    Vec avg = x;             // t-weighted running average of subgradient iterates
    double wsum = 0.0;
    Vec stalled_at;          // incumbent at the last fruitless polish

    while (evals < cfg.max_iters) {
        // --- subgradient phase ---
        for (int r = 0; r < cfg.subgrad_round && evals < cfg.max_iters; ++r) {
            ++t_sub;
            wsum += static_cast<double>(t_sub);
            const double mixin = static_cast<double>(t_sub) / wsum;
            for (std::size_t j = 0; j < x.size(); ++j) avg[j] += mixin * (x[j] - avg[j]);
            gmax_sq = std::max(gmax_sq, norm_sq(vs.subgrad));
            const double cert = residual_certificate(X, x, vs.subgrad, rho);
            if (cert <= delta && vs.value <= best_v) return finish(x, vs.value, cert);
            const double gamma = 2.0 * rho / static_cast<double>(t_sub + 1);
            Vec y = x;
            axpy(-gamma, vs.subgrad, y);
            x = X.project(y);
            vs = eval_vs(x);
            if (vs.value < best_v) {
                best_v = vs.value;
                best_x = x;
            }
        }
        if (evals >= cfg.max_iters) break;

        // --- polish phase: monotone projected gradient with backtracking,
        // started from the best candidate seen (averaged point included);
        // skipped while the incumbent sits where polish last stalled ---
        if (stalled_at != best_x) {
            Vec px = best_x;
            double pv = best_v;
            {
                const Vec avg_p = X.project(avg);
                const double av = eval_v(avg_p);
                if (av < pv) {
                    px = avg_p;
                    pv = av;
                }
            }
            ValueSubgrad pvs = eval_vs(px);
            pv = pvs.value;
            bool moved = true;
            while (moved && evals < cfg.max_iters) {
                const double cert = residual_certificate(X, px, pvs.subgrad, rho);
                if (pv < best_v) {
                    best_v = pv;
                    best_x = px;
                }
                if (cert <= delta && pv <= best_v) return finish(px, pv, cert);
                moved = false;
                double step = rho;
                for (int h = 0; h < 48 && evals < cfg.max_iters; ++h) {
                    Vec y = px;
                    axpy(-step, pvs.subgrad, y);
                    Vec xc = X.project(y);
                    const double vc = eval_v(xc);
                    if (vc < pv) {
                        px = std::move(xc);
                        pvs = eval_vs(px);
                        pv = pvs.value;
                        moved = true;
                        break;
                    }
                    step *= 0.25;
                }
            }
            if (pv < best_v) {
                best_v = pv;
                best_x = px;
            }
            stalled_at = best_x;
        }
    }

    // Budget exhausted: return the best candidate with the sharpest gap
    // estimate available (residual certificate or averaging bound).
    {
        const Vec avg_p = X.project(avg);
        const double av = eval_v(avg_p);
        if (av < best_v) {
            best_v = av;
            best_x = avg_p;
        }
    }
    const ValueSubgrad fvs = surrogate_value_subgrad(model, best_x);
    const double cert = residual_certificate(X, best_x, fvs.subgrad, rho);
    const double theory =
        (t_sub > 0) ? 2.0 * gmax_sq * rho / static_cast<double>(t_sub + 1)
                    : std::numeric_limits<double>::infinity();
    return finish(best_x, best_v, std::min(cert, theory));
}

SubsolveResult solve_prox_enumerated(const std::vector<SurrogateModel>& models,
                                     const FeasibleSet& X, const SubsolverConfig& cfg,
                                     double delta, const Vec& x_start) {
    if (models.empty()) throw std::invalid_argument("solve_prox_enumerated: no models");
    SubsolveResult best;
    for (std::size_t i = 0; i < models.size(); ++i) {
        SubsolveResult r = solve_prox(models[i], X, cfg, delta, x_start);
        if (i == 0 || r.value < best.value) {
            best = std::move(r);
            best.winning_tuple = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace smm
