// Command-line driver: body construction, sampling, isotropic
// normalization, direction search, certification and the verification
// suites, with reproducible seeded configuration.
//
// Exit codes: 0 success, 1 check failures, 2 usage/config errors,
// 3 search budget exhausted (partial output written).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "subgauss/bodies.hpp"
#include "subgauss/construction.hpp"
#include "subgauss/errors.hpp"
#include "subgauss/evaluator.hpp"
#include "subgauss/isotropy.hpp"
#include "subgauss/moments.hpp"
#include "subgauss/rng.hpp"
#include "subgauss/sampling.hpp"
#include "subgauss/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subgauss;

namespace {

std::uint64_t mix(std::uint64_t seed) {
    std::uint64_t h = seed ^ 0xA5A5A5A55A5A5A5AULL;
    h ^= h >> 33;
    h *= 0xFF51AFD7ED558CCDULL;
    h ^= h >> 33;
    return h;
}

struct CommonConfig {
    std::string body_file;
    std::string kind = "cube";
    int n = 16;
    std::uint64_t seed = 1;
    std::int64_t samples = 200000;
    std::int64_t budget = 400000;
    double c0 = 0.25, C0 = 4.0, eps = 0.05, beta = 0.9;
    std::string evaluator = "auto";  // mc | quad | auto
    int threads = 0;                 // 0: hardware
    std::string out = "out";
    std::string format = "csv";     // csv | json | bin
    int burn_in = -1;
    int thinning = -1;
};

int resolved_threads(const CommonConfig& c) {
    if (c.threads > 0) return c.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

BodySpec make_body_from_config(const CommonConfig& c) {
    if (!c.body_file.empty()) {
        std::ifstream in(c.body_file);
        if (!in) throw InvalidParam("cannot open body file: " + c.body_file);
        json j;
        in >> j;
        return BodySpec::from_json(j);
    }
    if (c.kind == "cube") return BodySpec::cube(c.n);
    if (c.kind == "ball") return BodySpec::euclidean_ball(c.n);
    if (c.kind == "l1ball") return BodySpec::lp_ball(c.n, 1.0);
    if (c.kind == "simplex") return BodySpec::simplex(c.n);
    if (c.kind == "cone") return BodySpec::cone_over_cube(c.n);
    if (c.kind.rfind("lpball:", 0) == 0)
        return BodySpec::lp_ball(c.n, std::stod(c.kind.substr(7)));
    throw InvalidParam("unknown body kind: " + c.kind);
}

// Threads and output paths do not change payloads; they stay out of the
// hash so reruns at different parallelism compare byte-identical.
json config_json(const CommonConfig& c, const std::string& command,
                 const json& extra) {
    json j = {{"command", command},
              {"body", c.body_file.empty() ? json(c.kind) : json(c.body_file)},
              {"n", c.n},
              {"seed", c.seed},
              {"samples", c.samples},
              {"budget", c.budget},
              {"c0", c.c0},
              {"C0", c.C0},
              {"eps", c.eps},
              {"beta", c.beta},
              {"evaluator", c.evaluator},
              {"format", c.format},
              {"extra", extra}};
    return j;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SubgaussError("cannot write " + path.string());
    out << text;
}

void write_sidecar(const fs::path& dir, const std::string& config_hash) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    json meta = {{"config_hash", config_hash},
                 {"unix_millis",
                  std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}};
    write_text(dir / "meta.json", meta.dump(2) + "\n");
}

std::string profiles_csv(const std::vector<MomentProfile>& profiles) {
    std::string out = "theta_id,p,value,ci_low,ci_high,method\n";
    char buf[160];
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        for (const auto& e : profiles[i].entries) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%s\n", i,
                          e.p, e.value, e.lo, e.hi,
                          e.method == EstimateMethod::MonteCarlo ? "mc" : "quad");
            out += buf;
        }
    }
    return out;
}

struct Pipeline {
    BodySpec body;
    Eigen::MatrixXd T;
    double L_K = 0.0;
    std::unique_ptr<MarginalEvaluator> search_eval;   // isotropic frame
    std::unique_ptr<MarginalEvaluator> certify_eval;  // original frame
    json isotropy_info;
};

Pipeline build_pipeline(const CommonConfig& c) {
    Pipeline p{make_body_from_config(c), {}, 0.0, nullptr, nullptr, {}};
    const int threads = resolved_threads(c);
    const bool want_quad = c.evaluator == "quad" ||
                           (c.evaluator == "auto" &&
                            p.body.kind() == BodyKind::EuclideanBall);
    if (want_quad) {
        auto iso = closed_form_isotropy(p.body);
        if (!iso || p.body.kind() != BodyKind::EuclideanBall)
            throw Unsupported(
                "quadrature search evaluator requires the euclidean ball; use "
                "--evaluator mc");
        p.T = iso->first.asDiagonal().toDenseMatrix();
        p.L_K = iso->second;
        p.search_eval = std::make_unique<QuadEvaluator>(p.body, true);
        p.certify_eval = std::make_unique<QuadEvaluator>(p.body, false);
        p.isotropy_info = {{"path", "closed_form"}, {"L_K", p.L_K}};
        return p;
    }

    HitAndRunOptions hr;
    hr.burn_in = c.burn_in;
    hr.thinning = c.thinning;
    const SampleMethod method = p.body.has_direct_sampler()
                                    ? SampleMethod::Direct
                                    : SampleMethod::HitAndRun;
    auto batch = sample_uniform(p.body, c.samples, c.seed, method, hr, threads);
    auto cov = estimate_covariance(batch, threads);
    auto iso = isotropic_transform(cov.sigma);
    p.T = iso.T;
    p.L_K = iso.L_K;
    auto transformed = transform_batch(batch, iso.T);
    p.search_eval = std::make_unique<McEvaluator>(std::move(transformed), threads);
    auto certify_mc = std::make_shared<McEvaluator>(
        p.body, c.samples, mix(c.seed), method, hr, threads, std::nullopt);
    // out-of-sample whitening residual from the certification batch
    iso.cov_residual =
        covariance_residual(transform_batch(certify_mc->batch(), iso.T), iso.L_K);
    p.certify_eval = std::make_unique<AutoEvaluator>(p.body, certify_mc);
    p.isotropy_info = iso.to_json();
    p.isotropy_info["path"] = "sampled";
    p.isotropy_info["covariance_ci_frobenius"] = cov.ci_frobenius;
    return p;
}

int cmd_find(const CommonConfig& c) {
    const auto cfg = config_json(c, "find", {});
    const std::string hash = fnv1a_hex(cfg.dump());
    fs::create_directories(c.out);

    Pipeline pipe = build_pipeline(c);
    const int n = pipe.body.dim();
    auto grid = GridD::make(n, c.c0, c.C0, c.eps);
    FindOptions fopts;
    fopts.beta = c.beta;
    fopts.budget = c.budget;
    fopts.seed = c.seed;
    auto found = find_directions(*pipe.search_eval, grid, pipe.L_K, pipe.T, fopts);
    auto report = certify(*pipe.certify_eval, &pipe.body, found.set, true);

    json out = found.set.to_json();
    out["config"] = cfg;
    out["config_hash"] = hash;
    out["isotropy"] = pipe.isotropy_info;
    out["certification"] = report.to_json();
    out["profiles_csv"] = "profiles.csv";
    out["status"] =
        found.status == FindStatus::Ok ? "ok" : "budget_exhausted";
    write_text(fs::path(c.out) / "directions.json", out.dump(2) + "\n");

    std::vector<MomentProfile> dense;
    for (const auto& cert : report.per_theta) dense.push_back(cert.profile);
    write_text(fs::path(c.out) / "profiles.csv",
               "# config_hash " + hash + "\n" + profiles_csv(dense));
    write_sidecar(c.out, hash);

    std::printf("find: %d/%d directions, certify %s (sup=%.3f inf=%.3f)\n",
                found.set.count(), found.set.target_m,
                report.all_pass ? "pass" : "FAIL", report.empirical_C,
                report.empirical_c);
    if (found.status == FindStatus::BudgetExhausted) return 3;
    return report.all_pass ? 0 : 1;
}

int cmd_verify(const CommonConfig& c, const std::string& suite) {
    const auto cfg = config_json(c, "verify", {{"suite", suite}});
    const std::string hash = fnv1a_hex(cfg.dump());
    SuiteOptions opts;
    opts.seed = c.seed;
    opts.threads = resolved_threads(c);
    opts.budget_scale = static_cast<double>(c.samples) / 200000.0;
    auto results = run_suite(suite, opts);

    fs::create_directories(c.out);
    json arr = json::array();
    for (const auto& r : results) arr.push_back(r.to_json());
    json out = {{"config", cfg},
                {"config_hash", hash},
                {"suite", suite},
                {"ok", suite_ok(results)},
                {"results", arr}};
    write_text(fs::path(c.out) / "report.json", out.dump(2) + "\n");
    write_sidecar(c.out, hash);

    std::fputs(summary_table(results).c_str(), stdout);
    return suite_ok(results) ? 0 : 1;
}

int cmd_profile(const CommonConfig& c, const std::string& theta_spec,
                const std::string& pgrid_spec) {
    const auto cfg =
        config_json(c, "profile", {{"theta", theta_spec}, {"pgrid", pgrid_spec}});
    const std::string hash = fnv1a_hex(cfg.dump());
    auto body = make_body_from_config(c);
    const int n = body.dim();
    const int threads = resolved_threads(c);

    std::vector<Eigen::VectorXd> thetas;
    if (theta_spec.rfind("random:", 0) == 0) {
        const int k = std::stoi(theta_spec.substr(7));
        CounterRng rng(c.seed, stream::id(stream::kCheck, 77));
        for (int i = 0; i < k; ++i) thetas.push_back(rng.unit_vector(n));
    } else if (theta_spec == "axis") {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[n - 1] = 1.0;
        thetas.push_back(e);
    } else if (theta_spec.rfind('e', 0) == 0) {
        const int i = std::stoi(theta_spec.substr(1)) - 1;
        if (i < 0 || i >= n) throw InvalidParam("theta index out of range");
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[i] = 1.0;
        thetas.push_back(e);
    } else {
        throw InvalidParam("theta spec must be eK, axis, or random:K");
    }

    std::vector<double> grid;
    if (pgrid_spec == "dyadic") {
        grid = half_dyadic_grid(n);
        if (grid.back() < n) grid.push_back(n);
    } else if (pgrid_spec == "grid") {
        // the search grid plus the endpoint order
        grid = GridD::make(n, c.c0, c.C0, c.eps).exponents;
        grid.push_back(n);
    } else {
        std::stringstream ss(pgrid_spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
        if (grid.empty()) throw InvalidParam("empty p grid");
    }

    std::unique_ptr<MarginalEvaluator> eval;
    if (c.evaluator == "quad") {
        eval = std::make_unique<QuadEvaluator>(body, false);
    } else {
        HitAndRunOptions hr;
        hr.burn_in = c.burn_in;
        hr.thinning = c.thinning;
        const SampleMethod method = body.has_direct_sampler()
                                        ? SampleMethod::Direct
                                        : SampleMethod::HitAndRun;
        if (c.evaluator == "mc") {
            eval = std::make_unique<McEvaluator>(body, c.samples, c.seed, method,
                                                 hr, threads, std::nullopt);
        } else {
            auto mc = std::make_shared<McEvaluator>(body, c.samples, c.seed,
                                                    method, hr, threads,
                                                    std::nullopt);
            eval = std::make_unique<AutoEvaluator>(body, mc);
        }
    }

    std::vector<MomentProfile> profiles;
    for (const auto& theta : thetas)
        profiles.push_back(make_profile(*eval, theta, grid, 0.0));

    fs::create_directories(c.out);
    write_text(fs::path(c.out) / "profile.csv",
               "# config_hash " + hash + "\n" + profiles_csv(profiles));
    write_sidecar(c.out, hash);
    std::printf("profile: %zu direction(s), %zu orders -> %s/profile.csv\n",
                profiles.size(), grid.size(), c.out.c_str());
    return 0;
}

int cmd_sample(const CommonConfig& c, const std::string& method_name) {
    const auto cfg = config_json(c, "sample", {{"method", method_name}});
    const std::string hash = fnv1a_hex(cfg.dump());
    auto body = make_body_from_config(c);
    HitAndRunOptions hr;
    hr.burn_in = c.burn_in;
    hr.thinning = c.thinning;
    SampleMethod method;
    if (method_name == "direct") {
        method = SampleMethod::Direct;
    } else if (method_name == "hitrun") {
        method = SampleMethod::HitAndRun;
    } else if (method_name == "auto") {
        method = body.has_direct_sampler() ? SampleMethod::Direct
                                           : SampleMethod::HitAndRun;
    } else {
        throw InvalidParam("method must be direct, hitrun, or auto");
    }
    auto batch = sample_uniform(body, c.samples, c.seed, method, hr,
                                resolved_threads(c));
    fs::create_directories(c.out);
    if (c.format == "bin") {
        write_batch_bin((fs::path(c.out) / "samples.bin").string(), batch);
    } else if (c.format == "csv") {
        write_batch_csv((fs::path(c.out) / "samples.csv").string(), batch);
    } else {
        throw InvalidParam("sample format must be csv or bin");
    }
    write_sidecar(c.out, hash);
    std::printf("sample: %lld points of %s -> %s\n",
                static_cast<long long>(batch.size()), body.name().c_str(),
                c.out.c_str());
    return 0;
}

int cmd_isotropize(const CommonConfig& c) {
    const auto cfg = config_json(c, "isotropize", {});
    const std::string hash = fnv1a_hex(cfg.dump());
    auto body = make_body_from_config(c);
    HitAndRunOptions hr;
    hr.burn_in = c.burn_in;
    hr.thinning = c.thinning;
    const SampleMethod method = body.has_direct_sampler()
                                    ? SampleMethod::Direct
                                    : SampleMethod::HitAndRun;
    auto batch =
        sample_uniform(body, c.samples, c.seed, method, hr, resolved_threads(c));
    auto cov = estimate_covariance(batch, resolved_threads(c));
    auto iso = isotropic_transform(cov.sigma);
    // out-of-sample diagnostics: a fresh batch, pushed through T
    auto holdout = transform_batch(
        sample_uniform(body, c.samples, mix(c.seed), method, hr,
                       resolved_threads(c)),
        iso.T);
    iso.cov_residual = covariance_residual(holdout, iso.L_K);

    // cross-check: L_K as the second marginal moment along random
    // directions of the held-out transformed batch
    double cross = 0.0;
    {
        CounterRng rng(c.seed, stream::id(stream::kCheck, 55));
        for (int i = 0; i < 10; ++i)
            cross += marginal_lp_raw(holdout, rng.unit_vector(body.dim()), 2.0);
        cross /= 10.0;
    }

    json out = iso.to_json();
    out["config"] = cfg;
    out["config_hash"] = hash;
    out["covariance_ci_frobenius"] = cov.ci_frobenius;
    out["L_K_crosscheck"] = cross;
    fs::create_directories(c.out);
    write_text(fs::path(c.out) / "transform.json", out.dump(2) + "\n");
    write_sidecar(c.out, hash);
    std::printf("isotropize: L_K=%.6f det=%.12f residual=%.3g\n", iso.L_K,
                iso.det_check, iso.cov_residual);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orthonormal subgaussian direction laboratory"};
    app.require_subcommand(1);

    CommonConfig c;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--body", c.body_file, "body description JSON file");
        sub->add_option("--kind", c.kind,
                        "catalog body: cube|ball|l1ball|lpball:P|simplex|cone");
        sub->add_option("--n", c.n, "dimension");
        sub->add_option("--seed", c.seed, "master seed");
        sub->add_option("--samples", c.samples, "sample budget N");
        sub->add_option("--budget", c.budget, "evaluator-call budget for find");
        sub->add_option("--c0", c.c0, "dyadic grid constant c0");
        sub->add_option("--C0", c.C0, "outer threshold constant C0");
        sub->add_option("--eps", c.eps, "inner threshold constant eps");
        sub->add_option("--beta", c.beta, "target fraction beta");
        sub->add_option("--evaluator", c.evaluator, "mc|quad|auto");
        sub->add_option("--threads", c.threads, "worker threads (0 = cores)");
        sub->add_option("--out", c.out, "output directory");
        sub->add_option("--format", c.format, "csv|json|bin");
        sub->add_option("--burn-in", c.burn_in, "hit-and-run burn-in");
        sub->add_option("--thinning", c.thinning, "hit-and-run thinning");
    };

    auto* find = app.add_subcommand("find", "search for a direction set");
    add_common(find);
    std::string suite = "all";
    auto* verify = app.add_subcommand("verify", "run verification checks");
    add_common(verify);
    verify->add_option("--suite", suite,
                       "all|moments|correlation|endpoint|counterexample|volume|mass");
    std::string theta_spec = "e1";
    std::string pgrid = "grid";
    auto* profile = app.add_subcommand("profile", "moment profile of directions");
    add_common(profile);
    profile->add_option("--theta", theta_spec, "eK | axis | random:K");
    profile->add_option("--pgrid", pgrid,
                        "comma list, 'grid' (search grid + n), or 'dyadic'");
    std::string method_name = "auto";
    auto* sample = app.add_subcommand("sample", "draw uniform samples");
    add_common(sample);
    sample->add_option("--method", method_name, "direct|hitrun|auto");
    auto* isotropize = app.add_subcommand("isotropize", "estimate the whitening map");
    add_common(isotropize);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (find->parsed()) return cmd_find(c);
        if (verify->parsed()) return cmd_verify(c, suite);
        if (profile->parsed()) return cmd_profile(c, theta_spec, pgrid);
        if (sample->parsed()) return cmd_sample(c, method_name);
        if (isotropize->parsed()) return cmd_isotropize(c);
    } catch (const InvalidParam& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const Unsupported& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const SubgaussError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}

