#include "smm/smm.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "smm/rng.hpp"
#include "smm/saa.hpp"
#include "smm/surrogate.hpp"

namespace smm {

namespace {

// Accuracy requested from the residual subsolve.  A value gap of delta on a
// (1/rho)-strongly-convex prox objective bounds the distance to the true
// mapped point by sqrt(2 rho delta), so this keeps the map evaluation well
// below typical residual tolerances.
constexpr double kResidualDelta = 1e-13;

void check_config(const SmmConfig& cfg) {
    if (!(cfg.rho > 0.0) || !std::isfinite(cfg.rho))
        throw std::invalid_argument("rho must be positive and finite");
    if (cfg.max_outer_iters < 0) throw std::invalid_argument("max_outer_iters must be >= 0");
    if (cfg.stopping.check_every < 1)
        throw std::invalid_argument("stopping.check_every must be >= 1");
    if (cfg.stopping.residual_N < 1)
        throw std::invalid_argument("stopping.residual_N must be >= 1");
    cfg.schedule.check_params();
}

SmmResult run_impl(const CompoundProblem& p, const Vec& x0, const SmmConfig& cfg, bool enhanced,
                   double eps) {
    check_config(cfg);
    const std::vector<std::int64_t> sizes = cfg.schedule.generate();

    Vec x = p.X.project(x0);
    SampleStream xi_stream(p.xi_dist, cfg.seed, "xi");
    SampleStream eta_stream(p.xi_dist, cfg.seed, "eta");
    SampleBatch xi_batch;
    SampleBatch eta_batch;

    SmmResult out;
    bool any_uncertified = false;
    bool converged = false;
    int consecutive_ok = 0;
    const bool stopping_on = cfg.stopping.residual_tol > 0.0;

    const int last =
        static_cast<int>(std::min<std::int64_t>(cfg.max_outer_iters,
                                                static_cast<std::int64_t>(sizes.size())));
    for (int nu = 1; nu <= last; ++nu) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::int64_t N = sizes[static_cast<std::size_t>(nu - 1)];

        if (!p.G.absent())
            xi_stream.extend(xi_batch, static_cast<std::size_t>(N) - xi_batch.rows.size());
        if (!p.F.absent())
            eta_stream.extend(eta_batch, static_cast<std::size_t>(N) - eta_batch.rows.size());

        const double delta = cfg.subsolver.delta_for(nu);

        SubsolveResult res;
        double v_center = 0.0;
        if (enhanced) {
            const TupleEnumeration tuples =
                enumerate_active_tuples(p, x, eps, cfg.subsolver.enum_cap);
            std::vector<SurrogateModel> models;
            models.reserve(tuples.g_picks.size());
            for (std::size_t t = 0; t < tuples.g_picks.size(); ++t) {
                SurrogateModel m =
                    build_surrogate_model(p, x, xi_batch, eta_batch, tuples.g_picks[t],
                                          tuples.f_picks[t]);
                set_prox(m, x, cfg.rho);
                models.push_back(std::move(m));
            }
            res = solve_prox_enumerated(models, p.X, cfg.subsolver, delta, x);
            v_center = surrogate_value(models[static_cast<std::size_t>(res.winning_tuple)], x);
        } else {
            SurrogateModel model = build_surrogate_model(p, x, xi_batch, eta_batch);
            set_prox(model, x, cfg.rho);
            v_center = surrogate_value(model, x);
            res = solve_prox(model, p.X, cfg.subsolver, delta, x);
        }
        if (!res.certified) any_uncertified = true;

        IterateRecord rec;
        rec.iter = nu;
        rec.N = N;
        rec.theta_saa = saa_objective(p, xi_batch, eta_batch, res.x_out);
        rec.step_norm = dist(res.x_out, x);
        rec.delta = delta;
        rec.gap = res.certified_gap;
        rec.surrogate_new = res.value;
        rec.surrogate_center = v_center;
        rec.certified = res.certified;
        rec.winning_tuple = enhanced ? res.winning_tuple : -1;

        x = res.x_out;

        if (stopping_on && nu % cfg.stopping.check_every == 0) {
            const std::uint64_t check_seed =
                Rng::derive_seed(cfg.seed, "residual-" + std::to_string(nu));
            const ResidualReport rep =
                fixed_point_residual(p, x, cfg.rho, cfg.stopping.residual_N, check_seed);
            rec.residual = rep.r;
            const bool qualifies = rep.r <= cfg.stopping.residual_tol &&
                                   cfg.stopping.residual_N >= N;
            consecutive_ok = qualifies ? consecutive_ok + 1 : 0;
            if (consecutive_ok >= 2) converged = true;
        }

        if (cfg.timings) {
            const auto t1 = std::chrono::steady_clock::now();
            rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        out.trace.records.push_back(std::move(rec));
        if (converged) break;
    }

    out.x = std::move(x);
    out.trace.status = any_uncertified ? SmmStatus::Uncertified
                       : converged     ? SmmStatus::Converged
                                       : SmmStatus::IterLimit;
    return out;
}

}  // namespace

double default_rho(const FeasibleSet& X) {
    const double d = X.diameter();
    return (std::isfinite(d) && d > 0.0) ? d : 1.0;
}

const char* to_string(SmmStatus s) {
    switch (s) {
        case SmmStatus::Converged: return "Converged";
        case SmmStatus::IterLimit: return "IterLimit";
        case SmmStatus::Uncertified: return "Uncertified";
    }
    return "Unknown";
}

SmmResult run_smm(const CompoundProblem& p, const Vec& x0, const SmmConfig& cfg) {
    return run_impl(p, x0, cfg, /*enhanced=*/false, 0.0);
}

SmmResult run_enhanced_smm(const CompoundProblem& p, const Vec& x0, const SmmConfig& cfg,
                           double eps) {
    return run_impl(p, x0, cfg, /*enhanced=*/true, eps);
}

ResidualReport fixed_point_residual(const CompoundProblem& p, const Vec& x_hat, double rho,
                                    std::int64_t N, std::uint64_t seed) {
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw std::invalid_argument("rho must be positive and finite");
    if (N < 1) throw std::invalid_argument("residual sample size must be >= 1");

    ResidualReport rep;
    rep.x_hat = p.X.project(x_hat);
    rep.N = N;

    SampleStream xi_stream(p.xi_dist, seed, "res-xi");
    SampleStream eta_stream(p.xi_dist, seed, "res-eta");
    const SampleBatch xi_batch =
        p.G.absent() ? SampleBatch{} : xi_stream.draw_batch(static_cast<std::size_t>(N));
    const SampleBatch eta_batch =
        p.F.absent() ? SampleBatch{} : eta_stream.draw_batch(static_cast<std::size_t>(N));

    SurrogateModel model = build_surrogate_model(p, rep.x_hat, xi_batch, eta_batch);
    set_prox(model, rep.x_hat, rho);

    SubsolverConfig scfg;  // default evaluation budget, tight target below
    const SubsolveResult res = solve_prox(model, p.X, scfg, kResidualDelta, rep.x_hat);

    rep.x_mapped = res.x_out;
    rep.r = dist(rep.x_hat, rep.x_mapped);
    rep.certificate = res.certified_gap;
    rep.certified = res.certified;
    return rep;
}

std::string trace_to_csv(const IterateTrace& trace) {
    std::string out = "iter,N,theta_saa,step_norm,delta,gap,residual,wall_ms\n";
    char buf[512];
    for (const IterateRecord& r : trace.records) {
        std::snprintf(buf, sizeof buf, "%d,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter,
                      static_cast<long long>(r.N), r.theta_saa, r.step_norm, r.delta, r.gap,
                      r.residual, r.wall_ms);
        out += buf;
    }
    return out;
}

void write_trace_csv(const IterateTrace& trace, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open trace file for writing: " + path);
    const std::string s = trace_to_csv(trace);
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!f) throw std::runtime_error("failed writing trace file: " + path);
}

}  // namespace smm
