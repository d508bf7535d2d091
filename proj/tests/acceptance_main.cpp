// Acceptance suite: drives each top-level requirement end to end and
// prints one pass/fail line per criterion. The CLI binary path comes in
// as argv[1] so the pipeline criteria exercise the real command surface.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "subgauss/bodies.hpp"
#include "subgauss/construction.hpp"
#include "subgauss/evaluator.hpp"
#include "subgauss/exactpoly.hpp"
#include "subgauss/moments.hpp"
#include "subgauss/quadrature.hpp"
#include "subgauss/rng.hpp"
#include "subgauss/sampling.hpp"
#include "subgauss/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subgauss;

namespace {

std::string g_cli;
fs::path g_work;

int run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " >> " +
                            (g_work / "cli.log").string() + " 2>&1";
    const int ret = std::system(cmd.c_str());
    if (ret == -1) return -1;
    return (ret >> 8) & 0xff;
}

json load_json(const fs::path& p) {
    std::ifstream in(p);
    json j;
    in >> j;
    return j;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

// --------------------------------------------------------------------------
// 1. full direction-set pipeline on symmetric bodies
// --------------------------------------------------------------------------

Outcome criterion1() {
    Outcome out;
    char buf[256];
    for (const std::string kind : {"ball", "cube"}) {
        double sup_min = 1e300, sup_max = 0, inf_min = 1e300, inf_max = 0;
        for (int n : {10, 20, 40}) {
            const fs::path dir = g_work / ("c1_" + kind + std::to_string(n));
            const auto t0 = std::chrono::steady_clock::now();
            const int code = run_cli("find --kind " + kind + " --n " +
                                     std::to_string(n) + " --seed 7 --out " +
                                     dir.string());
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            out.require(code == 0, kind + " n=" + std::to_string(n) +
                                       " exit code " + std::to_string(code));
            out.require(secs < 300.0, kind + " runtime " + std::to_string(secs));
            if (code != 0) continue;

            const json j = load_json(dir / "directions.json");
            const int m = j.at("count").get<int>();
            const int target = static_cast<int>(std::ceil(0.9 * n));
            out.require(m >= target, kind + " n=" + std::to_string(n) + " count " +
                                         std::to_string(m));

            Eigen::MatrixXd thetas(m, n);
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < n; ++k)
                    thetas(i, k) = j.at("thetas")[i][k].get<double>();
            const double ortho =
                (thetas * thetas.transpose() - Eigen::MatrixXd::Identity(m, m))
                    .cwiseAbs()
                    .maxCoeff();
            out.require(ortho < 1e-10,
                        kind + " orthonormality defect " + std::to_string(ortho));

            const json cert = j.at("certification");
            for (const auto& row : cert.at("per_theta")) {
                out.require(row.at("sup_ratio").get<double>() <= 3.0, "sup > 3");
                out.require(row.at("inf_ratio").get<double>() >= 0.2, "inf < 0.2");
                out.require(row.at("pass").get<bool>(), "certify flag fail");
            }
            const double sup = cert.at("empirical_C").get<double>();
            const double inf = cert.at("empirical_c").get<double>();
            sup_min = std::min(sup_min, sup);
            sup_max = std::max(sup_max, sup);
            inf_min = std::min(inf_min, inf);
            inf_max = std::max(inf_max, inf);
        }
        out.require(sup_max / sup_min <= 1.5, kind + " sup grows across n");
        out.require(inf_max / inf_min <= 1.5, kind + " inf grows across n");
        std::snprintf(buf, sizeof(buf), "%s sup in [%.3f,%.3f] inf in [%.3f,%.3f]",
                      kind.c_str(), sup_min, sup_max, inf_min, inf_max);
        out.note(buf);
    }
    return out;
}

// --------------------------------------------------------------------------
// 2. closed-form moment oracles
// --------------------------------------------------------------------------

Outcome criterion2() {
    Outcome out;
    auto cube = BodySpec::cube(3);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
    e1[0] = 1.0;
    auto md = *cube.marginal(e1);
    for (double p : {1.0, 2.0, 4.0, 8.0}) {
        const double expect = 0.5 * std::pow(p + 1.0, -1.0 / p);
        const double quad = marginal_lp_quad(md, p).value;
        out.require(std::abs(quad - expect) <= 1e-8 * expect,
                    "quadrature p=" + std::to_string(p));
    }

    auto batch = sample_uniform(cube, 1000000, 17, SampleMethod::Direct, {}, 2);
    for (double p : {1.0, 2.0, 4.0, 8.0}) {
        const double expect = 0.5 * std::pow(p + 1.0, -1.0 / p);
        const auto est = marginal_lp_mc(batch, e1, p, 2);
        const double sigma = (est.hi - est.lo) / (2.0 * 1.959963985);
        out.require(std::abs(est.value - expect) <= 3.0 * sigma,
                    "monte carlo p=" + std::to_string(p));
    }

    auto gauss = sample_gaussian(1, 1000000, 18, 2);
    const auto g4 = marginal_lp_mc(gauss, Eigen::VectorXd::Ones(1), 4.0, 2);
    const double sigma4 = (g4.hi - g4.lo) / (2.0 * 1.959963985);
    out.require(std::abs(g4.value - std::pow(3.0, 0.25)) <= 3.0 * sigma4,
                "gaussian fourth moment");
    out.note("cube L^p and gaussian L^4 match closed forms");
    return out;
}

// --------------------------------------------------------------------------
// 3. negative-moment transfer identity
// --------------------------------------------------------------------------

Outcome criterion3() {
    Outcome out;
    auto r = check_neg_moment_transfer(10, 20, 30000, 23);
    out.require(r.status == CheckStatus::Pass, "identity instances failed");
    double worst = 0.0;
    for (const auto& row : r.observed.at("instances"))
        worst = std::max(worst, row.at("rel_gap").get<double>());
    char buf[96];
    std::snprintf(buf, sizeof(buf), "10 instances, worst gap %.3f", worst);
    out.note(buf);

    for (int n : {20, 50, 100}) {
        for (double q : {1.0, n / 8.0, n / 4.0, n / 2.0}) {
            const double ratio = gaussian_sphere_prefactor(n, q) / std::sqrt(n);
            out.require(ratio >= 0.5 && ratio <= 1.5,
                        "prefactor comparability n=" + std::to_string(n));
        }
    }
    return out;
}

// --------------------------------------------------------------------------
// 4. the counterexample suite
// --------------------------------------------------------------------------

Outcome criterion4() {
    Outcome out;
    auto r = check_counterexample({50, 200});
    out.require(r.status == CheckStatus::Pass, "counterexample checks failed");
    double slope50 = 0.0;
    for (const auto& row : r.observed.at("axis_slopes"))
        if (row.at("n").get<int>() == 50) slope50 = row.at("slope").get<double>();
    out.require(slope50 >= 0.8 && slope50 <= 1.05, "slope at n=50 out of range");

    auto axis = check_axis_flagged(200);
    out.require(axis.ok() && axis.status == CheckStatus::Fail,
                "axis direction was not flagged");
    char buf[128];
    std::snprintf(buf, sizeof(buf), "slope(n=50)=%.3f tv(n=200)=%.4f axis sup=%.2f",
                  slope50, r.observed.at("tv_distance_n200").get<double>(),
                  axis.observed.at("sup_ratio").get<double>());
    out.note(buf);
    return out;
}

// --------------------------------------------------------------------------
// 5. endpoint comparison on the catalog
// --------------------------------------------------------------------------

Outcome criterion5() {
    Outcome out;
    struct Item {
        BodySpec body;
        const char* tag;
    };
    const Item items[] = {{BodySpec::cube(8), "cube"},
                          {BodySpec::euclidean_ball(8), "ball"},
                          {BodySpec::lp_ball(8, 1.0), "l1ball"},
                          {BodySpec::simplex(8), "simplex"},
                          {BodySpec::cone_over_cube(8), "cone"}};
    double worst = 0.0;
    for (const auto& item : items) {
        CounterRng rng(31, stream::id(stream::kCheck, 42));
        int checked = 0;
        for (int t = 0; t < 20; ++t) {
            const Eigen::VectorXd theta = rng.unit_vector(8);
            auto r = check_endpoint(item.body, theta);
            if (r.status == CheckStatus::Indeterminate) continue;
            ++checked;
            out.require(r.status == CheckStatus::Pass,
                        std::string(item.tag) + " endpoint fail");
            worst = std::max(worst, r.observed.at("R_over_norm").get<double>());
        }
        out.require(checked == 20, std::string(item.tag) + " directions skipped");
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "5 bodies x 20 directions, max R/||X||_n = %.3f",
                  worst);
    out.note(buf);
    return out;
}

// --------------------------------------------------------------------------
// 6. one-dimensional moment comparison
// --------------------------------------------------------------------------

Outcome criterion6() {
    Outcome out;
    const std::vector<double> grid = {1, 1.5, 2, 3, 4, 6, 8, 12, 16, 24, 32};
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j)
            pairs.push_back({grid[i], grid[j]});

    auto cube = BodySpec::cube(2);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(2);
    e1[0] = 1.0;
    MarginalDensity uniform = *cube.marginal(e1);
    MarginalDensity expo;
    expo.direction = Eigen::VectorXd::Ones(1);
    expo.lo = 0;
    expo.hi = 800;
    expo.log_pdf = [](double t) {
        return t >= 0 ? -t : -std::numeric_limits<double>::infinity();
    };
    MarginalDensity laplace;
    laplace.direction = Eigen::VectorXd::Ones(1);
    laplace.lo = -800;
    laplace.hi = 800;
    laplace.log_pdf = [](double t) { return -std::abs(t) - std::log(2.0); };
    auto cone = BodySpec::cone_over_cube(50);
    Eigen::VectorXd axis = Eigen::VectorXd::Zero(50);
    axis[49] = 1.0;
    MarginalDensity cone_axis = *cone.marginal(axis);

    double grand = 0.0;
    for (const auto& [name, md] :
         std::vector<std::pair<std::string, MarginalDensity*>>{
             {"uniform", &uniform},
             {"exponential", &expo},
             {"laplace", &laplace},
             {"cone_axis", &cone_axis}}) {
        auto r = check_moment_comparison(name, *md, pairs);
        out.require(r.status == CheckStatus::Pass, name + " exceeded 3");
        grand = std::max(grand, r.observed.at("max_ratio").get<double>());
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "4 laws x %zu pairs, max ratio %.3f <= 3",
                  pairs.size(), grand);
    out.note(buf);
    return out;
}

// --------------------------------------------------------------------------
// 7. gaussian correlation, empirical
// --------------------------------------------------------------------------

Outcome criterion7() {
    Outcome out;
    {
        SymmetricConvexSet A{"slab_x", [](const Eigen::VectorXd& x) {
                                 return std::abs(x[0]) <= 1.0;
                             }};
        SymmetricConvexSet B{"slab_y", [](const Eigen::VectorXd& x) {
                                 return std::abs(x[1]) <= 1.0;
                             }};
        auto r = check_gaussian_correlation(2, A, B, 1000000, 41);
        out.require(r.status == CheckStatus::Pass, "product slabs inequality");
        out.require(r.observed.at("equality_within_ci").get<bool>(),
                    "product slabs equality");
    }
    int trial = 0;
    double worst_margin = 1e300;  // most negative standardized difference
    for (int n : {2, 3}) {
        for (int k = 0; k < 10; ++k, ++trial) {
            auto [A, B] = random_symmetric_pair(n, 43, trial);
            auto r = check_gaussian_correlation(n, A, B, 1000000, 1000 + trial);
            out.require(r.status == CheckStatus::Pass,
                        "random pair " + std::to_string(trial));
            const double d = r.observed.at("difference").get<double>();
            const double s = r.observed.at("sigma").get<double>();
            worst_margin = std::min(worst_margin, d / s);
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "20 random pairs + product slabs, worst margin %.2f sigma (>= -3)",
                  worst_margin);
    out.note(buf);
    return out;
}

// --------------------------------------------------------------------------
// 8. volume-radius separation at small n
// --------------------------------------------------------------------------

Outcome criterion8() {
    Outcome out;
    auto cube = BodySpec::cube(8);
    auto r = check_volume_radius_separation(cube, 8, {6, 7, 8}, GridD::make(8),
                                            120000, 47);
    out.require(r.status == CheckStatus::Pass, "separation failed");
    double vradA = 0, vradB = 0;
    for (const auto& row : r.observed.at("per_dim")) {
        out.require(row.at("witness_found").get<bool>(), "no witness");
        vradA = row.at("vrad_A").get<double>();
        for (const auto& b : row.at("vrad_B"))
            vradB = std::max(vradB, b.at("vrad").get<double>());
    }

    auto bad = check_volume_radius_separation(cube, 8, {6},
                                              GridD::make(8, 0.25, 4.0, 4.0),
                                              60000, 48);
    out.require(bad.status == CheckStatus::Fail,
                "eps=C0 did not report expected failure");
    char buf[96];
    std::snprintf(buf, sizeof(buf), "vrad(A)=%.2f > max vrad(B)=%.3f, witnesses found",
                  vradA, vradB);
    out.note(buf);
    return out;
}

// --------------------------------------------------------------------------
// 9. determinism across worker counts
// --------------------------------------------------------------------------

Outcome criterion9() {
    Outcome out;
    struct Run {
        std::string args;
        std::vector<std::string> payloads;
    };
    const std::vector<Run> runs = {
        {"find --kind cube --n 10 --samples 20000 --seed 11",
         {"directions.json", "profiles.csv"}},
        {"sample --kind l1ball --n 5 --samples 5000 --seed 12 --format bin",
         {"samples.bin"}},
        {"profile --kind cone --n 12 --theta axis --pgrid dyadic --evaluator quad "
         "--seed 13",
         {"profile.csv"}},
        {"verify --suite mass --samples 20000 --seed 14", {"report.json"}},
    };
    for (std::size_t ri = 0; ri < runs.size(); ++ri) {
        std::vector<std::string> bytes;
        for (int threads : {1, 4, 8}) {
            const fs::path dir =
                g_work / ("c9_run" + std::to_string(ri) + "_t" + std::to_string(threads));
            const int code = run_cli(runs[ri].args + " --threads " +
                                     std::to_string(threads) + " --out " +
                                     dir.string());
            out.require(code == 0, "run " + std::to_string(ri) + " exit " +
                                       std::to_string(code));
            std::string all;
            for (const auto& f : runs[ri].payloads)
                all += read_bytes(dir / f) + "\x01";
            bytes.push_back(std::move(all));
        }
        out.require(bytes[0] == bytes[1] && bytes[1] == bytes[2],
                    "payload differs across thread counts, run " +
                        std::to_string(ri));
        out.require(!bytes[0].empty(), "empty payload, run " + std::to_string(ri));
    }
    out.note("find/sample/profile/verify payloads byte-identical at 1/4/8 threads");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance_tests <path-to-cli>\n");
        return 2;
    }
    g_cli = argv[1];
    g_work = fs::path("acceptance_tmp");
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    struct Entry {
        int id;
        const char* label;
        Outcome (*fn)();
    };
    const Entry entries[] = {
        {1, "direction-set pipeline on ball and cube, n = 10/20/40", &criterion1},
        {2, "closed-form moment oracles", &criterion2},
        {3, "negative-moment transfer identity", &criterion3},
        {4, "shifted-exponential counterexample suite", &criterion4},
        {5, "endpoint bound R <= 8||X||_n on the catalog", &criterion5},
        {6, "one-dimensional moment comparison bound", &criterion6},
        {7, "gaussian correlation, empirical", &criterion7},
        {8, "volume-radius separation with witnesses", &criterion8},
        {9, "byte-identical payloads across worker counts", &criterion9},
    };

    int failures = 0;
    for (const auto& e : entries) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o = e.fn();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        std::printf("%s criterion %d: %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL",
                    e.id, e.label, secs, o.detail.c_str());
        if (!o.pass) ++failures;
    }
    if (failures > 0) {
        std::printf("acceptance: %d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("acceptance: all criteria passed\n");
    return 0;
}
