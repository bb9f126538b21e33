// Command-line driver: solve configured compound-risk instances, evaluate
// scalar risk measures on data files, and run sampling / schedule / residual
// diagnostics.  One process, one run per invocation; every output an
// invocation produces is a function of the config file and the seed.
//
// Exit codes
//   solve:          0 converged, 2 iteration limit, 3 uncertified subproblem,
//                   1 config or I/O error
//   risk:           0 printed, 1 bad measure / data / parameters
//   saa-rate:       0 printed, 1 bad parameters
//   schedule-check: 0 pass, 1 fail
//   residual:       0 printed, 1 config or I/O error
// Usage errors (unknown flags, missing arguments) exit 1.

#include <cerrno>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "CLI11.hpp"
#include "smm/apps.hpp"
#include "smm/csv.hpp"
#include "smm/distribution.hpp"
#include "smm/feasible_set.hpp"
#include "smm/oracles.hpp"
#include "smm/risk.hpp"
#include "smm/saa.hpp"
#include "smm/schedule.hpp"
#include "smm/smm.hpp"

namespace {

using smm::Vec;

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

struct ProblemSection {
    std::string kind;          // "bpoe-deviation" | "oce-deviation"
    std::string data;          // sample rows, one scenario per line
    int pilot = 50;            // leading data rows used as the pilot batch
    double tau = 0.0;          // bpoe-deviation threshold
    std::string utility = "cvar";  // oce-deviation: linear | cvar | exp
    double alpha = 0.95;
    double gamma = 1.0;
    std::string feasible = "simplex";  // simplex | box
    double box_lo = 0.0;
    double box_hi = 1.0;
};

struct RunSettings {
    ProblemSection problem;
    double rho = 0.0;  // <= 0 selects the set-scaled default
    int max_outer_iters = 30;
    smm::GrowthSchedule schedule;
    smm::SubsolverConfig subsolver;
    smm::StoppingConfig stopping;
    bool enhanced = false;
    double eps_active = 1e-6;
    Vec x0;  // empty: use the feasible set's canonical point
    std::string trace_path = "trace.csv";
    std::string summary_path = "summary.txt";
    std::uint64_t seed = 0;
};

std::uint64_t parse_seed_literal(const std::string& text, const std::string& origin) {
    if (text.empty()) throw std::runtime_error(origin + ": empty seed value");
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (errno != 0 || end == nullptr || *end != '\0' || text[0] == '-')
        throw std::runtime_error(origin + ": seed must be a decimal 64-bit integer, got '" +
                                 text + "'");
    return static_cast<std::uint64_t>(v);
}

RunSettings load_settings(const std::string& path) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(path, pt);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("cannot read config: ") + e.what());
    }

    RunSettings rs;
    try {
        rs.problem.kind = pt.get<std::string>("problem.kind");
        rs.problem.data = pt.get<std::string>("problem.data");
        rs.problem.pilot = pt.get<int>("problem.pilot", rs.problem.pilot);
        rs.problem.tau = pt.get<double>("problem.tau", rs.problem.tau);
        rs.problem.utility = pt.get<std::string>("problem.utility", rs.problem.utility);
        rs.problem.alpha = pt.get<double>("problem.alpha", rs.problem.alpha);
        rs.problem.gamma = pt.get<double>("problem.gamma", rs.problem.gamma);
        rs.problem.feasible = pt.get<std::string>("problem.feasible", rs.problem.feasible);
        rs.problem.box_lo = pt.get<double>("problem.box_lo", rs.problem.box_lo);
        rs.problem.box_hi = pt.get<double>("problem.box_hi", rs.problem.box_hi);

        rs.rho = pt.get<double>("smm.rho", rs.rho);
        rs.max_outer_iters = pt.get<int>("smm.max_outer_iters", rs.max_outer_iters);
        rs.schedule.c1 = pt.get<double>("smm.c1", rs.schedule.c1);
        rs.schedule.c2 = pt.get<double>("smm.c2", rs.schedule.c2);
        rs.schedule.c3 = pt.get<double>("smm.c3", rs.schedule.c3);
        rs.schedule.k_bar = pt.get<std::int64_t>("smm.k_bar", rs.schedule.k_bar);
        rs.schedule.N_init = pt.get<std::int64_t>("smm.n_init", rs.schedule.N_init);
        rs.subsolver.max_iters = pt.get<int>("smm.sub_max_iters", rs.subsolver.max_iters);
        rs.subsolver.delta0 = pt.get<double>("smm.sub_delta0", rs.subsolver.delta0);
        rs.subsolver.subgrad_round =
            pt.get<int>("smm.sub_subgrad_round", rs.subsolver.subgrad_round);
        rs.subsolver.enum_cap = pt.get<int>("smm.sub_enum_cap", rs.subsolver.enum_cap);
        rs.stopping.residual_tol = pt.get<double>("smm.residual_tol", rs.stopping.residual_tol);
        rs.stopping.residual_N = pt.get<std::int64_t>("smm.residual_n", rs.stopping.residual_N);
        rs.stopping.check_every = pt.get<int>("smm.check_every", rs.stopping.check_every);
        rs.enhanced = pt.get<bool>("smm.enhanced", rs.enhanced);
        rs.eps_active = pt.get<double>("smm.eps_active", rs.eps_active);
        if (auto x0_text = pt.get_optional<std::string>("smm.x0")) {
            std::stringstream ss(*x0_text);
            std::string field;
            while (std::getline(ss, field, ',')) {
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(field, &used);
                } catch (const std::exception&) {
                    used = std::string::npos;
                }
                if (used != field.size())
                    throw std::runtime_error("bad x0 entry '" + field + "'");
                rs.x0.push_back(v);
            }
            if (rs.x0.empty()) throw std::runtime_error("x0 must list at least one coordinate");
        }

        rs.trace_path = pt.get<std::string>("output.trace", rs.trace_path);
        rs.summary_path = pt.get<std::string>("output.summary", rs.summary_path);

        rs.seed = parse_seed_literal(pt.get<std::string>("seed.value", "0"), "config [seed]");
    } catch (const boost::property_tree::ptree_error& e) {
        throw std::runtime_error(std::string("bad config value: ") + e.what());
    }

    if (const char* env = std::getenv("SMM_SEED"))
        rs.seed = parse_seed_literal(env, "SMM_SEED");

    // The schedule horizon tracks the outer-iteration budget; a zero budget
    // keeps a valid one-entry schedule and lets the driver stop immediately.
    if (rs.max_outer_iters < 0) throw std::runtime_error("max_outer_iters must be >= 0");
    rs.schedule.horizon = std::max<std::int64_t>(rs.max_outer_iters, 1);
    return rs;
}

smm::UtilitySpec utility_from(const ProblemSection& ps) {
    if (ps.utility == "linear") return smm::UtilitySpec::linear();
    if (ps.utility == "cvar") return smm::UtilitySpec::piecewise_linear_cvar(ps.alpha);
    if (ps.utility == "exp") return smm::UtilitySpec::exponential(ps.gamma);
    throw std::runtime_error("unknown utility '" + ps.utility + "' (linear | cvar | exp)");
}

smm::FeasibleSet feasible_from(const ProblemSection& ps, int n) {
    if (ps.feasible == "simplex") return smm::FeasibleSet::simplex(n);
    if (ps.feasible == "box")
        return smm::FeasibleSet::box(Vec(n, ps.box_lo), Vec(n, ps.box_hi));
    throw std::runtime_error("unknown feasible set '" + ps.feasible + "' (simplex | box)");
}

smm::BuiltProblem build_problem(const RunSettings& rs) {
    const auto rows = smm::read_matrix_csv(rs.problem.data);
    const int n = static_cast<int>(rows.front().size());
    if (rs.problem.pilot < 1) throw std::runtime_error("pilot must be >= 1");
    const std::size_t pilot_n =
        std::min<std::size_t>(rows.size(), static_cast<std::size_t>(rs.problem.pilot));
    smm::SampleBatch pilot;
    pilot.rows.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(pilot_n));

    const auto loss = smm::LossSpec::affine_portfolio(n);
    const auto X = feasible_from(rs.problem, n);
    const auto xi = smm::DistributionSpec::empirical(rows);

    smm::BuiltProblem bp;
    if (rs.problem.kind == "bpoe-deviation") {
        bp = smm::build_bpoe_deviation(loss, rs.problem.tau, X, xi, pilot);
        if (bp.bounds.pilot_warning)
            std::cerr << "note: pilot scale estimate was degenerate; the lifted bound was "
                         "enlarged from the breakpoint ladder\n";
    } else if (rs.problem.kind == "oce-deviation") {
        bp = smm::build_oce_deviation(loss, utility_from(rs.problem), X, xi, pilot);
    } else {
        throw std::runtime_error("unknown problem kind '" + rs.problem.kind +
                                 "' (bpoe-deviation | oce-deviation)");
    }
    return bp;
}

// The default start point: the feasible set's canonical point, except that
// lifted scale coordinates start at the pilot estimate of the optimal scale
// (the stored bound divided by the safety factor) rather than mid-box -- the
// safety margin exists to bound the set, not to center the start.
Vec default_start(const smm::BuiltProblem& bp, int loss_n) {
    Vec x0 = bp.problem.X.some_point();
    const double safety = std::max(bp.bounds.safety, 1.0);
    for (std::size_t j = 0; j < bp.bounds.a_hi.size(); ++j)
        x0[static_cast<std::size_t>(loss_n) + j] = bp.bounds.a_hi[j] / safety;
    return bp.problem.X.project(x0);
}

// ---------------------------------------------------------------------------
// Output formatting
// ---------------------------------------------------------------------------

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print12(double v) { std::printf("%.12g\n", v); }

void write_summary(const std::string& path, const smm::SmmResult& res) {
    double final_theta = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    if (!res.trace.records.empty()) final_theta = res.trace.records.back().theta_saa;
    for (auto it = res.trace.records.rbegin(); it != res.trace.records.rend(); ++it) {
        if (!std::isnan(it->residual)) {
            residual = it->residual;
            break;
        }
    }
    std::ostringstream os;
    os << "status " << smm::to_string(res.trace.status) << "\n";
    os << "final_theta " << fmt17(final_theta) << "\n";
    os << "residual " << fmt17(residual) << "\n";
    os << "x ";
    for (std::size_t i = 0; i < res.x.size(); ++i) {
        if (i) os << ",";
        os << fmt17(res.x[i]);
    }
    os << "\n";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open summary file for writing: " + path);
    f << os.str();
    if (!f) throw std::runtime_error("failed writing summary file: " + path);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_solve(const std::string& config_path) {
    RunSettings rs;
    smm::BuiltProblem bp;
    try {
        rs = load_settings(config_path);
        bp = build_problem(rs);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    smm::SmmConfig cfg;
    cfg.rho = rs.rho > 0.0 ? rs.rho : smm::default_rho(bp.problem.X);
    cfg.schedule = rs.schedule;
    cfg.subsolver = rs.subsolver;
    cfg.max_outer_iters = rs.max_outer_iters;
    cfg.stopping = rs.stopping;
    cfg.seed = rs.seed;
    cfg.timings = false;  // keep outputs a pure function of config + seed

    smm::SmmResult res;
    try {
        Vec x0;
        if (rs.x0.empty()) {
            const int loss_n =
                bp.problem.X.dim() - static_cast<int>(bp.bounds.a_hi.size());
            x0 = default_start(bp, loss_n);
        } else {
            if (static_cast<int>(rs.x0.size()) != bp.problem.X.dim())
                throw std::runtime_error(
                    "x0 has " + std::to_string(rs.x0.size()) + " coordinates but the problem has " +
                    std::to_string(bp.problem.X.dim()) + " (decision plus lifted variables)");
            x0 = bp.problem.X.project(rs.x0);
        }
        res = rs.enhanced ? smm::run_enhanced_smm(bp.problem, x0, cfg, rs.eps_active)
                          : smm::run_smm(bp.problem, x0, cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    try {
        smm::write_trace_csv(res.trace, rs.trace_path);
        write_summary(rs.summary_path, res);
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 1;
    }

    switch (res.trace.status) {
        case smm::SmmStatus::Converged: return 0;
        case smm::SmmStatus::IterLimit: return 2;
        case smm::SmmStatus::Uncertified: return 3;
    }
    return 1;
}

int cmd_risk(const std::string& measure, const std::string& data_path, double alpha,
             double tau, const std::string& utility, double gamma) {
    try {
        const auto rows = smm::read_matrix_csv(data_path);
        std::vector<double> values;
        values.reserve(rows.size());
        for (const auto& r : rows) {
            if (r.size() != 1)
                throw std::runtime_error("risk data must be a single-column CSV: " + data_path);
            values.push_back(r[0]);
        }
        const auto Z = smm::EmpiricalRV::uniform(values);

        double v = 0.0;
        if (measure == "var") {
            v = smm::var(Z, alpha);
        } else if (measure == "cvar") {
            v = smm::cvar(Z, alpha);
        } else if (measure == "poe") {
            v = smm::poe(Z, tau);
        } else if (measure == "bpoe") {
            v = smm::bpoe(Z, tau).value;
        } else if (measure == "oce") {
            ProblemSection ps;
            ps.utility = utility;
            ps.alpha = alpha;
            ps.gamma = gamma;
            v = smm::oce(Z, utility_from(ps)).value;
        } else {
            throw std::runtime_error("unknown risk measure '" + measure +
                                     "' (var | cvar | poe | bpoe | oce)");
        }
        print12(v);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

// The built-in decay instance: Theta(x) = E[-xi]_+ with xi standard normal,
// whose true value 1/sqrt(2 pi) is the half-normal mean.  The command reports
// the mean absolute sample-average error per size and the fitted log-log
// slope, which sits near -1/2.
int cmd_saa_rate(const std::vector<std::int64_t>& sizes, int trials, std::uint64_t seed) {
    try {
        smm::CompoundProblem p;
        smm::ScalarOracle hinge;
        hinge.eval = [](const Vec& y) { return std::max(y[0], 0.0); };
        hinge.subgrad = [](const Vec& y) { return Vec{y[0] > 0.0 ? 1.0 : 0.0}; };
        p.outer = smm::identity_psi(hinge, 1.0);
        smm::RandomVectorOracle neg;
        neg.eval = [](const Vec&, const Vec& xi) { return Vec{-xi[0]}; };
        neg.subgrad = [](const Vec&, const Vec&, int) { return Vec{0.0}; };
        p.G = smm::RandomFn::smooth(1, neg, 0.0);
        p.F = smm::RandomFn::none();
        p.X = smm::FeasibleSet::interval(0.0, 1.0);
        p.xi_dist = smm::DistributionSpec::gaussian({0.0}, {1.0});

        const double theta_true = 1.0 / std::sqrt(2.0 * std::acos(-1.0));
        const auto res = smm::saa_rate_experiment(p, {0.5}, theta_true, sizes, trials, seed);

        std::printf("N,mean_abs_error\n");
        for (const auto& row : res.rows)
            std::printf("%" PRId64 ",%s\n", row.N, fmt17(row.mean_abs_error).c_str());
        if (res.slope_defined)
            std::printf("slope %.12g\n", res.slope);
        else
            std::printf("slope undefined\n");
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_schedule_check(const smm::GrowthSchedule& gs) {
    try {
        gs.check_params();
        const auto seq = gs.generate();
        const auto chk = gs.validate(seq);
        if (!chk.ok) {
            std::printf("fail: %s\n", chk.reason.c_str());
            return 1;
        }
        std::printf("pass\n");
        return 0;
    } catch (const std::exception& e) {
        std::printf("fail: %s\n", e.what());
        return 1;
    }
}

int cmd_residual(const std::string& config_path, const std::string& point_path) {
    try {
        const RunSettings rs = load_settings(config_path);
        const smm::BuiltProblem bp = build_problem(rs);
        const auto rows = smm::read_matrix_csv(point_path);
        if (rows.size() != 1)
            throw std::runtime_error("point file must hold exactly one row: " + point_path);
        const Vec& x_hat = rows.front();
        if (static_cast<int>(x_hat.size()) != bp.problem.X.dim())
            throw std::runtime_error("point dimension " + std::to_string(x_hat.size()) +
                                     " does not match the problem dimension " +
                                     std::to_string(bp.problem.X.dim()));
        const double rho = rs.rho > 0.0 ? rs.rho : smm::default_rho(bp.problem.X);
        const auto rep =
            smm::fixed_point_residual(bp.problem, x_hat, rho, rs.stopping.residual_N, rs.seed);
        print12(rep.r);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compound-risk solver and diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    auto* solve = app.add_subcommand(
        "solve", "run the majorize-minimize solver on a configured instance");
    solve->add_option("config", config_path, "INI config file")->required();

    std::string measure, data_path;
    double alpha = 0.95, tau = 0.0, gamma = 1.0;
    std::string utility = "cvar";
    auto* risk =
        app.add_subcommand("risk", "evaluate a risk measure on a single-column data file");
    risk->add_option("measure", measure, "var | cvar | poe | bpoe | oce")->required();
    risk->add_option("data", data_path, "single-column CSV of samples")->required();
    risk->add_option("--alpha", alpha, "level for var/cvar and the cvar utility");
    risk->add_option("--tau", tau, "threshold for poe/bpoe");
    risk->add_option("--utility", utility, "oce utility: linear | cvar | exp");
    risk->add_option("--gamma", gamma, "coefficient of the exp utility");

    std::vector<std::int64_t> sizes{100, 1000, 10000};
    int trials = 200;
    std::uint64_t rate_seed = 2024;
    auto* rate = app.add_subcommand(
        "saa-rate", "estimate the sample-average error decay on a built-in instance");
    rate->add_option("--sizes", sizes, "sample sizes")->delimiter(',');
    rate->add_option("--trials", trials, "independent trials per size");
    rate->add_option("--seed", rate_seed, "experiment seed");

    smm::GrowthSchedule gs;
    auto* sched = app.add_subcommand("schedule-check",
                                     "validate a sample-growth schedule parameterization");
    sched->add_option("--c1", gs.c1, "polynomial growth exponent parameter");
    sched->add_option("--c2", gs.c2, "polynomial growth scale");
    sched->add_option("--c3", gs.c3, "ratio-bound parameter");
    sched->add_option("--k-bar", gs.k_bar, "warm-up length");
    sched->add_option("--n-init", gs.N_init, "initial sample size");
    sched->add_option("--horizon", gs.horizon, "schedule length");

    std::string res_config, res_point;
    auto* resid = app.add_subcommand(
        "residual", "fixed-point residual of a configured instance at a given point");
    resid->add_option("config", res_config, "INI config file")->required();
    resid->add_option("point", res_point, "one-row CSV with the evaluation point")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (solve->parsed()) return cmd_solve(config_path);
    if (risk->parsed()) return cmd_risk(measure, data_path, alpha, tau, utility, gamma);
    if (rate->parsed()) return cmd_saa_rate(sizes, trials, rate_seed);
    if (sched->parsed()) return cmd_schedule_check(gs);
    if (resid->parsed()) return cmd_residual(res_config, res_point);
    return 1;
}
