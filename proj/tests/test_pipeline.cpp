#include <cmath>

#include "doctest.h"
#include "subgauss/bodies.hpp"
#include "subgauss/construction.hpp"
#include "subgauss/errors.hpp"
#include "subgauss/evaluator.hpp"
#include "subgauss/isotropy.hpp"
#include "subgauss/sampling.hpp"

using namespace subgauss;

namespace {

// The full search pipeline on a sampled body: isotropize, search in the
// whitened frame, certify in the original frame.
struct PipelineResult {
    FindResult found;
    CertifyReport report;
};

PipelineResult run_pipeline(const BodySpec& body, std::int64_t N, std::uint64_t seed,
                            SampleMethod method, double beta = 0.9) {
    HitAndRunOptions hr;
    auto batch = sample_uniform(body, N, seed, method, hr, 2);
    auto cov = estimate_covariance(batch, 2);
    auto iso = isotropic_transform(cov.sigma);
    McEvaluator search(transform_batch(batch, iso.T), 2);

    auto grid = GridD::make(body.dim());
    FindOptions opts;
    opts.seed = seed;
    opts.beta = beta;
    PipelineResult out{find_directions(search, grid, iso.L_K, iso.T, opts), {}};

    auto certify_mc = std::make_shared<McEvaluator>(
        body, N, seed ^ 0x5555, method, hr, 2, std::nullopt);
    AutoEvaluator orig(body, certify_mc);
    out.report = certify(orig, &body, out.found.set, true);
    return out;
}

}  // namespace

TEST_CASE("pipeline reaches the target count on the l1 ball and the simplex") {
    for (int n : {10, 20, 40}) {
        const std::int64_t N = std::max<std::int64_t>(60000, 12LL * n * n);
        for (auto body : {BodySpec::lp_ball(n, 1.0), BodySpec::simplex(n)}) {
            auto r = run_pipeline(body, N, 100 + n, SampleMethod::Direct);
            CHECK(r.found.status == FindStatus::Ok);
            const int target = static_cast<int>(std::ceil(0.9 * n));
            CHECK(r.found.set.count() >= target);
            const int m = r.found.set.count();
            Eigen::MatrixXd G = r.found.set.thetas * r.found.set.thetas.transpose();
            CHECK((G - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(r.report.all_pass);
        }
    }
}

TEST_CASE("pipeline on the cone: non-isotropic body, whitening matters") {
    const int n = 16;
    auto cone = BodySpec::cone_over_cube(n);
    auto r = run_pipeline(cone, 120000, 33, SampleMethod::Direct);
    CHECK(r.found.status == FindStatus::Ok);
    CHECK(r.found.set.count() >= 15);
    const int m = r.found.set.count();
    Eigen::MatrixXd G = r.found.set.thetas * r.found.set.thetas.transpose();
    CHECK((G - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-10);
    // at this dimension even axis-aligned directions stay inside the
    // two-sided bounds, so certification passes across the set
    CHECK(r.report.all_pass);
}

TEST_CASE("pipeline on an oracle polytope via hit-and-run") {
    // a lopsided random polytope in R^4, normalized by Monte Carlo
    std::vector<Halfspace> hs;
    auto push = [&](double a, double b, double c, double d, double off) {
        Eigen::VectorXd v(4);
        v << a, b, c, d;
        hs.push_back({v, off});
    };
    push(1, 0.3, 0, 0, 1.2);
    push(-1, 0.1, 0.2, 0, 0.8);
    push(0, 1, 0, 0.4, 1.0);
    push(0, -1, 0.3, 0, 1.1);
    push(0.2, 0, 1, 0, 0.9);
    push(0, 0, -1, 0.2, 1.3);
    push(0, 0.2, 0, 1, 1.0);
    push(0.1, 0, 0, -1, 0.7);
    auto poly = BodySpec::oracle_polytope(hs, 8.0, 300000, 71);
    CHECK_FALSE(poly.has_direct_sampler());

    auto r = run_pipeline(poly, 40000, 72, SampleMethod::HitAndRun);
    CHECK(r.found.status == FindStatus::Ok);
    CHECK(r.found.set.count() >= 4);  // ceil(0.9 * 4)
    Eigen::MatrixXd G = r.found.set.thetas * r.found.set.thetas.transpose();
    CHECK((G - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.report.all_pass);
}

TEST_CASE("grid orders beyond the sample guard are refused") {
    const int n = 64;  // D reaches 16, beyond p_max(10^4) = 8.38
    auto cube = BodySpec::cube(n);
    McEvaluator eval(cube, 10000, 5, SampleMethod::Direct, {}, 2);
    auto grid = GridD::make(n);
    FindOptions opts;
    CHECK_THROWS_AS(find_directions(eval, grid, 1.0 / std::sqrt(12.0),
                                    Eigen::MatrixXd::Identity(n, n), opts),
                    PTooLargeForBudget);
}
