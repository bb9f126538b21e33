// End-to-end tests of the command-line tool: every documented exit code, the
// reproducibility contract (same config + seed => byte-identical outputs),
// the seed environment override, and each subcommand's printed format.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "smm/risk.hpp"
#include "smm/rng.hpp"

namespace {

const std::string kCli = SMM_CLI_PATH;
const std::string kDir = "cli_scratch";

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
    REQUIRE(f.good());
}

// Run the tool through the shell, capturing exit code, stdout, and stderr.
CmdResult run(const std::string& args, const std::string& env_prefix = "") {
    std::filesystem::create_directories(kDir);
    const std::string out_path = kDir + "/cmd_out.txt";
    const std::string err_path = kDir + "/cmd_err.txt";
    const std::string cmd =
        env_prefix + "'" + kCli + "' " + args + " > " + out_path + " 2> " + err_path;
    const int raw = std::system(cmd.c_str());
    CmdResult r;
    r.code = (raw >= 0 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

// Two anti-correlated return columns with unequal variances; same shape as
// the solve configs below expect.
std::string two_asset_rows(int count, std::uint64_t seed) {
    smm::Rng rng(seed);
    std::ostringstream os;
    char buf[80];
    for (int i = 0; i < count; ++i) {
        const double g1 = rng.next_gauss();
        const double g2 = rng.next_gauss();
        const double e1 = 1.4 * g1;
        const double e2 = 0.9 * (-0.5 * g1 + 0.8660254 * g2);
        std::snprintf(buf, sizeof(buf), "%.10f,%.10f\n", 0.05 + e1, 0.06 + e2);
        os << buf;
    }
    return os.str();
}

struct SolveOpts {
    std::string kind = "bpoe-deviation";
    double tau = 0.7;
    int pilot = 200;
};

const std::string kDefaultSmm =
    "rho = 1\n"
    "max_outer_iters = 40\n"
    "sub_delta0 = 0.2\n"
    "sub_max_iters = 8000\n"
    "residual_tol = 2e-2\n"
    "residual_n = 2000\n"
    "check_every = 5\n";

std::string solve_config(const std::string& data, const std::string& trace,
                         const std::string& summary, const std::string& smm_section = kDefaultSmm,
                         const SolveOpts& opts = {}) {
    std::ostringstream os;
    os << "[problem]\n"
       << "kind = " << opts.kind << "\n"
       << "data = " << data << "\n"
       << "tau = " << opts.tau << "\n"
       << "pilot = " << opts.pilot << "\n"
       << "feasible = simplex\n"
       << "[smm]\n"
       << smm_section << "[output]\n"
       << "trace = " << trace << "\n"
       << "summary = " << summary << "\n"
       << "[seed]\n"
       << "value = 42\n";
    return os.str();
}

// Field after "x " on the last summary line, i.e. the final decision vector.
std::vector<double> summary_point(const std::string& summary_text) {
    std::istringstream is(summary_text);
    std::string line;
    std::string x_line;
    while (std::getline(is, line))
        if (line.rfind("x ", 0) == 0) x_line = line.substr(2);
    REQUIRE(!x_line.empty());
    std::vector<double> out;
    std::stringstream ss(x_line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(std::stod(field));
    return out;
}

int trace_data_rows(const std::string& trace_text) {
    int lines = 0;
    for (char c : trace_text)
        if (c == '\n') ++lines;
    return lines - 1;  // header
}

}  // namespace

TEST_CASE("risk subcommand evaluates each measure and rejects bad input") {
    std::filesystem::create_directories(kDir);
    write_file(kDir + "/atoms.csv", "1\n2\n3\n4\n");
    write_file(kDir + "/coin.csv", "0\n1\n");

    auto r = run("risk cvar " + kDir + "/atoms.csv --alpha 0.5");
    CHECK(r.code == 0);
    CHECK(r.out == "3.5\n");

    r = run("risk poe " + kDir + "/coin.csv --tau 0.5");
    CHECK(r.code == 0);
    CHECK(r.out == "0.5\n");

    r = run("risk var " + kDir + "/atoms.csv --alpha 0.5");
    CHECK(r.code == 0);
    CHECK(r.out == "2\n");

    // Cross-check the printed value against the library at full precision.
    r = run("risk bpoe " + kDir + "/atoms.csv --tau 3.5");
    CHECK(r.code == 0);
    {
        const auto Z = smm::EmpiricalRV::uniform({1.0, 2.0, 3.0, 4.0});
        const double expect = smm::bpoe(Z, 3.5).value;
        CHECK(std::stod(r.out) == doctest::Approx(expect).epsilon(1e-11));
    }

    r = run("risk oce " + kDir + "/atoms.csv --alpha 0.75");
    CHECK(r.code == 0);
    {
        const auto Z = smm::EmpiricalRV::uniform({1.0, 2.0, 3.0, 4.0});
        const double expect = smm::oce(Z, smm::UtilitySpec::piecewise_linear_cvar(0.75)).value;
        CHECK(std::stod(r.out) == doctest::Approx(expect).epsilon(1e-11));
    }

    r = run("risk sharpe " + kDir + "/atoms.csv");
    CHECK(r.code == 1);
    CHECK(r.err.find("unknown risk measure") != std::string::npos);

    write_file(kDir + "/wide.csv", "1,2\n3,4\n");
    r = run("risk cvar " + kDir + "/wide.csv --alpha 0.5");
    CHECK(r.code == 1);
    CHECK(r.err.find("single-column") != std::string::npos);

    r = run("risk cvar " + kDir + "/no_such_data.csv --alpha 0.5");
    CHECK(r.code == 1);
    CHECK(r.err.find("no_such_data.csv") != std::string::npos);
}

TEST_CASE("schedule-check prints pass for defaults and fail for bad parameters") {
    auto r = run("schedule-check");
    CHECK(r.code == 0);
    CHECK(r.out == "pass\n");

    r = run("schedule-check --c1 0.4 --c2 2 --horizon 50");
    CHECK(r.code == 0);
    CHECK(r.out == "pass\n");

    r = run("schedule-check --c3 5 --k-bar 3");
    CHECK(r.code == 1);
    CHECK(r.out.rfind("fail", 0) == 0);
}

TEST_CASE("saa-rate prints an error table whose fitted slope is negative") {
    const auto r = run("saa-rate --sizes 100,1000 --trials 30 --seed 5");
    REQUIRE(r.code == 0);
    std::istringstream is(r.out);
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "N,mean_abs_error");
    double err100 = 0.0, err1000 = 0.0;
    REQUIRE(std::getline(is, line));
    REQUIRE(std::sscanf(line.c_str(), "100,%lf", &err100) == 1);
    REQUIRE(std::getline(is, line));
    REQUIRE(std::sscanf(line.c_str(), "1000,%lf", &err1000) == 1);
    CHECK(err100 > err1000);
    double slope = 0.0;
    REQUIRE(std::getline(is, line));
    REQUIRE(std::sscanf(line.c_str(), "slope %lf", &slope) == 1);
    CHECK(slope < -0.2);
    CHECK(slope > -0.9);
}

TEST_CASE("solve converges on a two-asset instance and reproduces outputs byte for byte") {
    std::filesystem::create_directories(kDir);
    write_file(kDir + "/pair.csv", two_asset_rows(500, 3));
    write_file(kDir + "/run.ini",
               solve_config(kDir + "/pair.csv", kDir + "/t1.csv", kDir + "/s1.txt"));

    auto r = run("solve " + kDir + "/run.ini");
    CHECK(r.code == 0);
    const std::string t1 = slurp(kDir + "/t1.csv");
    const std::string s1 = slurp(kDir + "/s1.txt");
    CHECK(s1.rfind("status Converged", 0) == 0);
    CHECK(trace_data_rows(t1) >= 5);

    // Identical config + seed: byte-identical trace and summary.
    r = run("solve " + kDir + "/run.ini");
    CHECK(r.code == 0);
    CHECK(slurp(kDir + "/t1.csv") == t1);
    CHECK(slurp(kDir + "/s1.txt") == s1);

    // The seed environment override changes the sample paths.
    r = run("solve " + kDir + "/run.ini", "SMM_SEED=101 ");
    CHECK(r.code == 0);
    CHECK(slurp(kDir + "/t1.csv") != t1);

    // A malformed override is a config error, not a silent fallback.
    r = run("solve " + kDir + "/run.ini", "SMM_SEED=banana ");
    CHECK(r.code == 1);
    CHECK(r.err.find("SMM_SEED") != std::string::npos);
}

TEST_CASE("solve reports missing files as config errors naming the path") {
    std::filesystem::create_directories(kDir);
    write_file(kDir + "/missing_data.ini",
               solve_config(kDir + "/absent_returns.csv", kDir + "/mt.csv", kDir + "/ms.txt"));
    auto r = run("solve " + kDir + "/missing_data.ini");
    CHECK(r.code == 1);
    CHECK(r.err.find("absent_returns.csv") != std::string::npos);

    r = run("solve " + kDir + "/no_such_config.ini");
    CHECK(r.code == 1);
    CHECK(r.err.find("config") != std::string::npos);
}

TEST_CASE("solve with a zero outer-iteration budget exits 2 with a header-only trace") {
    std::filesystem::create_directories(kDir);
    write_file(kDir + "/pair0.csv", two_asset_rows(300, 4));
    write_file(kDir + "/zero.ini",
               solve_config(kDir + "/pair0.csv", kDir + "/zt.csv", kDir + "/zs.txt",
                            "rho = 1\nmax_outer_iters = 0\n"));
    const auto r = run("solve " + kDir + "/zero.ini");
    CHECK(r.code == 2);
    CHECK(slurp(kDir + "/zt.csv") == "iter,N,theta_saa,step_norm,delta,gap,residual,wall_ms\n");
    CHECK(slurp(kDir + "/zs.txt").rfind("status IterLimit", 0) == 0);
}

TEST_CASE("solve surfaces a persistently uncertified subproblem as exit 3") {
    std::filesystem::create_directories(kDir);
    write_file(kDir + "/pair3.csv", two_asset_rows(300, 5));
    // An absurdly tight per-iteration tolerance with a tiny budget cannot be
    // certified on a stochastic instance.
    write_file(kDir + "/uncert.ini",
               solve_config(kDir + "/pair3.csv", kDir + "/ut.csv", kDir + "/us.txt",
                            "rho = 1\nsub_delta0 = 1e-12\nsub_max_iters = 60\n"
                            "max_outer_iters = 5\nresidual_tol = 0\n"));
    const auto r = run("solve " + kDir + "/uncert.ini");
    CHECK(r.code == 3);
    CHECK(slurp(kDir + "/us.txt").rfind("status Uncertified", 0) == 0);
}

TEST_CASE("a single-atom instance converges in two iterations with zero residual") {
    std::filesystem::create_directories(kDir);
    write_file(kDir + "/det.csv", "0.05,0.08\n");
    SolveOpts det_opts;
    det_opts.tau = 0.3;
    det_opts.pilot = 1;
    write_file(kDir + "/det.ini",
               solve_config(kDir + "/det.csv", kDir + "/dt.csv", kDir + "/ds.txt",
                            "rho = 1\nmax_outer_iters = 10\nsub_delta0 = 1e-3\n"
                            "residual_tol = 1e-6\nresidual_n = 64\ncheck_every = 1\n",
                            det_opts));
    auto r = run("solve " + kDir + "/det.ini");
    CHECK(r.code == 0);
    const std::string summary = slurp(kDir + "/ds.txt");
    CHECK(summary.rfind("status Converged", 0) == 0);
    CHECK(trace_data_rows(slurp(kDir + "/dt.csv")) <= 3);

    // The residual subcommand at the returned point reports (near) zero.
    const auto x = summary_point(summary);
    std::ostringstream pt;
    char fbuf[40];
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::snprintf(fbuf, sizeof(fbuf), "%.17g", x[i]);
        pt << (i ? "," : "") << fbuf;
    }
    pt << "\n";
    write_file(kDir + "/det_point.csv", pt.str());
    r = run("residual " + kDir + "/det.ini " + kDir + "/det_point.csv");
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) <= 1e-6);

    // Dimension mismatches are config errors.
    write_file(kDir + "/short_point.csv", "0.5,0.5\n");
    r = run("residual " + kDir + "/det.ini " + kDir + "/short_point.csv");
    CHECK(r.code == 1);
    CHECK(r.err.find("dimension") != std::string::npos);

    write_file(kDir + "/two_rows.csv", "0.5,0.5,1\n0.5,0.5,1\n");
    r = run("residual " + kDir + "/det.ini " + kDir + "/two_rows.csv");
    CHECK(r.code == 1);
}

TEST_CASE("an oce-deviation config runs end to end with an honest status") {
    std::filesystem::create_directories(kDir);
    write_file(kDir + "/pair_oce.csv", two_asset_rows(300, 6));
    std::ostringstream os;
    os << "[problem]\n"
       << "kind = oce-deviation\n"
       << "data = " << kDir << "/pair_oce.csv\n"
       << "utility = exp\n"
       << "gamma = 1.0\n"
       << "pilot = 150\n"
       << "feasible = simplex\n"
       << "[smm]\n"
       << "rho = 1\n"
       << "max_outer_iters = 10\n"
       << "sub_delta0 = 0.2\n"
       << "[output]\n"
       << "trace = " << kDir << "/ot.csv\n"
       << "summary = " << kDir << "/os.txt\n"
       << "[seed]\n"
       << "value = 9\n";
    write_file(kDir + "/oce.ini", os.str());
    const auto r = run("solve " + kDir + "/oce.ini");
    CHECK(r.code == 2);  // short horizon, no stopping rule: iteration limit
    CHECK(slurp(kDir + "/os.txt").rfind("status IterLimit", 0) == 0);
    CHECK(trace_data_rows(slurp(kDir + "/ot.csv")) == 10);

    // Unknown problem kinds are config errors.
    SolveOpts bad;
    bad.kind = "cvar-direct";
    write_file(kDir + "/bad_kind.ini",
               solve_config(kDir + "/pair_oce.csv", kDir + "/bt.csv", kDir + "/bs.txt",
                            kDefaultSmm, bad));
    auto rb = run("solve " + kDir + "/bad_kind.ini");
    CHECK(rb.code == 1);
    CHECK(rb.err.find("kind") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    auto r = run("frobnicate");
    CHECK(r.code == 1);
    r = run("");
    CHECK(r.code == 1);
    r = run("solve");
    CHECK(r.code == 1);
}
