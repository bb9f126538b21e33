#include "smm/saa.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace smm {

double saa_objective(const CompoundProblem& p, const SampleBatch& xi_batch,
                     const SampleBatch& eta_batch, const Vec& x) {
    if (p.inner_dim() <= 0) throw std::invalid_argument("saa_objective: G and F are both absent");
    if (!p.G.absent() && xi_batch.empty())
        throw std::invalid_argument("saa_objective: xi batch is empty");
    if (!p.F.absent() && eta_batch.empty())
        throw std::invalid_argument("saa_objective: eta batch is empty");

    const std::size_t lphi = static_cast<std::size_t>(p.outer.lphi());
    const std::size_t lg = static_cast<std::size_t>(p.lg());
    const std::size_t lf = static_cast<std::size_t>(p.lf());

    // Inner average (1/m) sum_s F(x, eta^s), computed once.
    Vec fbar(lf, 0.0);
    if (!p.F.absent()) {
        for (const Vec& eta : eta_batch.rows) {
            const Vec v = p.F.fn.eval(x, eta);
            for (std::size_t i = 0; i < lf; ++i) fbar[i] += v[i];
        }
        const double inv_m = 1.0 / static_cast<double>(eta_batch.size());
        for (double& v : fbar) v *= inv_m;
    }

    // Outer average of phi over the xi samples.  When G is absent the phi
    // argument is constant in xi, so one evaluation suffices.
    Vec w(lphi, 0.0);
    const std::size_t n = p.G.absent() ? 1 : xi_batch.size();
    Vec u(lg + lf);
    for (std::size_t t = 0; t < n; ++t) {
        if (!p.G.absent()) {
            const Vec gv = p.G.fn.eval(x, xi_batch.rows[t]);
            for (std::size_t i = 0; i < lg; ++i) u[i] = gv[i];
        }
        for (std::size_t i = 0; i < lf; ++i) u[lg + i] = fbar[i];
        for (std::size_t j = 0; j < lphi; ++j) w[j] += p.outer.phi[j].eval(u);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : w) v *= inv_n;

    return p.outer.psi.eval(w);
}

SaaRateResult saa_rate_experiment(const CompoundProblem& p, const Vec& x, double theta_true,
                                  const std::vector<std::int64_t>& sizes, int trials,
                                  std::uint64_t seed) {
    if (sizes.size() < 2)
        throw std::invalid_argument("saa_rate_experiment: need at least 2 sizes");
    if (trials < 1) throw std::invalid_argument("saa_rate_experiment: trials must be >= 1");
    for (std::int64_t N : sizes)
        if (N < 1) throw std::invalid_argument("saa_rate_experiment: sizes must be >= 1");

    SaaRateResult res;
    res.high_variance = trials < 8;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const std::int64_t N = sizes[si];
        double sum_err = 0.0;
        for (int r = 0; r < trials; ++r) {
            const std::string tag = std::to_string(si) + "-" + std::to_string(r);
            SampleStream xi_stream(p.xi_dist, seed, "rate-xi-" + tag);
            SampleStream eta_stream(p.xi_dist, seed, "rate-eta-" + tag);
            const SampleBatch xi = xi_stream.draw_batch(static_cast<std::size_t>(N));
            SampleBatch eta;
            if (!p.F.absent()) eta = eta_stream.draw_batch(static_cast<std::size_t>(N));
            sum_err += std::fabs(saa_objective(p, xi, eta, x) - theta_true);
        }
        res.rows.push_back({N, sum_err / trials});
    }

    // Least-squares fit of log(error) on log(N), skipping exact (zero) rows.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (const auto& row : res.rows) {
        if (!(row.mean_abs_error > 0.0)) continue;
        const double lx = std::log(static_cast<double>(row.N));
        const double ly = std::log(row.mean_abs_error);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m >= 2) {
        const double denom = m * sxx - sx * sx;
        if (denom > 0.0) {
            res.slope = (m * sxy - sx * sy) / denom;
            res.slope_defined = true;
        }
    }
    res.exact = (m == 0);
    return res;
}

}  // namespace smm
