#include <cmath>

#include "doctest.h"
#include "subgauss/bodies.hpp"
#include "subgauss/construction.hpp"
#include "subgauss/errors.hpp"
#include "subgauss/evaluator.hpp"
#include "subgauss/quadrature.hpp"
#include "subgauss/rng.hpp"

using namespace subgauss;

namespace {

Eigen::VectorXd unit(int n, int i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = 1.0;
    return e;
}

// Synthetic evaluator with a prescribed ratio law; used to exercise the
// search mechanics on a controlled landscape.
class SyntheticEvaluator final : public MarginalEvaluator {
public:
    using Law = std::function<double(const Eigen::VectorXd&, double)>;
    SyntheticEvaluator(int n, Law law) : n_(n), law_(std::move(law)) {}
    int dim() const override { return n_; }
    double max_p() const override { return std::numeric_limits<double>::infinity(); }
    Estimate eval(const Eigen::VectorXd& y, double p) const override {
        ++calls_;
        const double v = law_(y, p);
        return {v, v, v, EstimateMethod::Quadrature};
    }

private:
    int n_;
    Law law_;
};

}  // namespace

TEST_CASE("dyadic grid construction") {
    auto g = GridD::make(64, 0.25);
    CHECK(g.exponents == std::vector<double>{1, 2, 4, 8, 16});
    auto g8 = GridD::make(8, 0.25);
    CHECK(g8.exponents == std::vector<double>{1, 2});
    CHECK_THROWS_AS(GridD::make(2, 0.25), DimensionTooSmall);
    CHECK_THROWS_AS(GridD::make(16, 0.3), InvalidParam);
    // sum of exponents <= 2 c0 n
    double sum = 0;
    for (double p : g.exponents) sum += p;
    CHECK(sum <= 2 * 0.25 * 64);
}

TEST_CASE("A_p membership: zero, isotropic scaling, huge vectors") {
    const int n = 8;
    auto ball = BodySpec::euclidean_ball(n);
    QuadEvaluator eval(ball);
    const double L = eval.L_K();
    auto grid = GridD::make(n, 0.25, 4.0, 0.05);

    for (double p : grid.exponents)
        CHECK(in_Ap(Eigen::VectorXd::Zero(n), p, grid, L, eval));

    // |y| = sqrt(n), p = 2: ||<.,y>||_2 = sqrt(n) L <= C0 sqrt(2n) L iff C0 >= 1/sqrt(2)
    Eigen::VectorXd y = std::sqrt(static_cast<double>(n)) * unit(n, 0);
    CHECK(in_Ap(y, 2.0, grid, L, eval));
    auto tight = GridD::make(n, 0.25, 0.5, 0.05);  // C0 = 0.5 < 1/sqrt(2)
    CHECK_FALSE(in_Ap(y, 2.0, tight, L, eval));

    CHECK_FALSE(in_Ap(1e9 * unit(n, 0), 2.0, grid, L, eval));
}

TEST_CASE("B_p membership: zero, unit-scale escape, small vectors") {
    const int n = 8;
    auto ball = BodySpec::euclidean_ball(n);
    QuadEvaluator eval(ball);
    const double L = eval.L_K();
    auto grid = GridD::make(n, 0.25, 4.0, 0.05);

    CHECK(in_Bp(Eigen::VectorXd::Zero(n), 2.0, grid, L, eval));

    Eigen::VectorXd y = std::sqrt(static_cast<double>(n)) * unit(n, 0);
    CHECK_FALSE(in_Bp(y, 2.0, grid, L, eval));  // sqrt(n) L > eps sqrt(2n) L

    Eigen::VectorXd tiny = 0.5 * grid.eps * std::sqrt(static_cast<double>(n)) * unit(n, 0);
    CHECK(in_Bp(tiny, 2.0, grid, L, eval));
}

TEST_CASE("conjunction semantics: one failing order rejects the candidate") {
    const int n = 8;
    // law: fails A at p=2 (huge value), fine elsewhere
    SyntheticEvaluator eval(n, [](const Eigen::VectorXd& y, double p) {
        return p == 2.0 ? 1e6 * y.norm() : 0.3 * std::sqrt(p) * y.norm();
    });
    auto grid = GridD::make(n, 0.25, 4.0, 0.05);
    FindOptions opts;
    opts.beta = 0.5;
    opts.budget = 500;
    auto r = find_directions(eval, grid, 1.0, Eigen::MatrixXd::Identity(n, n), opts);
    CHECK(r.status == FindStatus::BudgetExhausted);
    CHECK(r.set.count() == 0);
    CHECK(r.set.stats.rejected_A == r.set.stats.candidates_tested);
}

TEST_CASE("find_directions on the ball: first candidate accepted every step") {
    const int n = 20;
    auto ball = BodySpec::euclidean_ball(n);
    QuadEvaluator eval(ball);
    auto grid = GridD::make(n);
    FindOptions opts;
    opts.seed = 5;
    auto r = find_directions(eval, grid, eval.L_K(),
                             Eigen::MatrixXd::Identity(n, n), opts);
    CHECK(r.status == FindStatus::Ok);
    CHECK(r.set.count() == 18);  // ceil(0.9 * 20)
    CHECK(r.set.stats.candidates_tested == 18);  // symmetry: no rejections

    // orthonormality to 1e-10
    Eigen::MatrixXd G = r.set.thetas * r.set.thetas.transpose();
    CHECK((G - Eigen::MatrixXd::Identity(18, 18)).cwiseAbs().maxCoeff() < 1e-10);

    // determinism
    QuadEvaluator eval2(ball);
    auto r2 = find_directions(eval2, grid, eval2.L_K(),
                              Eigen::MatrixXd::Identity(n, n), opts);
    CHECK(r.set.thetas == r2.set.thetas);
}

TEST_CASE("find_directions on the cube via Monte Carlo: full set, deterministic") {
    const int n = 12;
    auto cube = BodySpec::cube(n);
    auto grid = GridD::make(n);
    FindOptions opts;
    opts.seed = 9;

    McEvaluator eval(cube, 60000, 101, SampleMethod::Direct, {}, 2);
    auto r = find_directions(eval, grid, 1.0 / std::sqrt(12.0),
                             Eigen::MatrixXd::Identity(n, n), opts);
    CHECK(r.status == FindStatus::Ok);
    CHECK(r.set.count() == 11);
    Eigen::MatrixXd G = r.set.thetas * r.set.thetas.transpose();
    CHECK((G - Eigen::MatrixXd::Identity(11, 11)).cwiseAbs().maxCoeff() < 1e-10);

    McEvaluator eval2(cube, 60000, 101, SampleMethod::Direct, {}, 1);
    auto r2 = find_directions(eval2, grid, 1.0 / std::sqrt(12.0),
                              Eigen::MatrixXd::Identity(n, n), opts);
    CHECK(r.set.thetas == r2.set.thetas);

    // profiles recorded over D for each accepted direction
    REQUIRE(r.set.profiles.size() == 11);
    for (const auto& prof : r.set.profiles)
        CHECK(prof.entries.size() == grid.exponents.size());
}

TEST_CASE("non-identity frame map keeps original-frame orthonormality") {
    const int n = 6;
    // synthetic isotropic-looking law so every candidate is accepted
    SyntheticEvaluator eval(n, [](const Eigen::VectorXd& y, double p) {
        return 0.5 * std::sqrt(p) * y.norm();
    });
    Eigen::MatrixXd T(n, n);
    CounterRng rng(77, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) T(i, j) = rng.normal();
    T = T * T.transpose() + 3.0 * Eigen::MatrixXd::Identity(n, n);  // SPD

    auto grid = GridD::make(n);
    FindOptions opts;
    opts.seed = 3;
    opts.beta = 0.8;
    auto r = find_directions(eval, grid, 1.0, T, opts);
    CHECK(r.status == FindStatus::Ok);
    const int m = r.set.count();
    CHECK(m == 5);
    Eigen::MatrixXd G = r.set.thetas * r.set.thetas.transpose();
    CHECK((G - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("budget exhaustion returns a partial set with exit status") {
    const int n = 10;
    auto ball = BodySpec::euclidean_ball(n);
    QuadEvaluator eval(ball);
    auto grid = GridD::make(n);
    FindOptions opts;
    opts.budget = 8;  // enough for ~1-2 steps only
    auto r = find_directions(eval, grid, eval.L_K(),
                             Eigen::MatrixXd::Identity(n, n), opts);
    CHECK(r.status == FindStatus::BudgetExhausted);
    CHECK(r.set.count() < r.set.target_m);
    CHECK(r.set.count() >= 1);
}

TEST_CASE("fallback optimizer recovers when rejection cannot succeed") {
    const int n = 8;
    // ratio depends on the angle to e1: only near-perfect alignment
    // satisfies the A constraint with C0 = 1, so rejection must stall.
    SyntheticEvaluator eval(n, [n](const Eigen::VectorXd& y, double p) {
        const double align = std::abs(y[0]) / y.norm();
        const double ratio = 0.5 + 50.0 * (1.0 - align);
        return ratio * std::sqrt(p * n) * (y.norm() / std::sqrt(n));
    });
    auto grid = GridD::make(n, 0.25, 1.0, 0.05);
    FindOptions opts;
    opts.beta = 0.125;  // one direction
    opts.budget = 2000;
    opts.seed = 11;
    auto r = find_directions(eval, grid, 1.0, Eigen::MatrixXd::Identity(n, n), opts);
    CHECK(r.status == FindStatus::Ok);
    CHECK(r.set.count() == 1);
    CHECK(r.set.stats.fallback_runs == 1);
    CHECK(r.set.stats.fallback_accepts == 1);
    CHECK(std::abs(r.set.thetas(0, 0)) > 0.95);  // converged near e1
}

TEST_CASE("certify on the ball: all pass with identical ratios") {
    const int n = 16;
    auto ball = BodySpec::euclidean_ball(n);
    QuadEvaluator eval(ball);
    auto grid = GridD::make(n);
    FindOptions opts;
    opts.seed = 21;
    auto r = find_directions(eval, grid, eval.L_K(),
                             Eigen::MatrixXd::Identity(n, n), opts);
    QuadEvaluator orig(ball, false);
    auto report = certify(orig, &ball, r.set, true);
    CHECK(report.all_pass);
    CHECK(report.grid_max == static_cast<double>(n));
    for (const auto& c : report.per_theta) {
        CHECK(c.pass);
        CHECK(c.endpoint_checked);
        // rotational symmetry: every direction sees the same ratios
        CHECK(c.sup_ratio == doctest::Approx(report.empirical_C).epsilon(1e-9));
        CHECK(c.inf_ratio == doctest::Approx(report.empirical_c).epsilon(1e-9));
    }
    for (int f : r.set.flags) CHECK(f == 1);
}

TEST_CASE("certify cube coordinate directions against the closed-form oracle") {
    const int n = 16;
    auto cube = BodySpec::cube(n);
    DirectionSet set;
    set.grid = GridD::make(n);
    set.L_K = 1.0 / std::sqrt(12.0);
    set.target_m = n;
    set.thetas = Eigen::MatrixXd::Identity(n, n);

    QuadEvaluator orig(cube, false);
    auto report = certify(orig, &cube, set, true);
    CHECK(report.all_pass);

    // oracle: ratio(p) = sqrt(3) (p+1)^{-1/p} / sqrt(p) over the dense grid
    auto grid = half_dyadic_grid(static_cast<double>(n));
    grid.push_back(n);
    double sup = 0, inf = 1e9, sup_at = 0;
    for (double p : grid) {
        const double ratio = std::sqrt(3.0) * std::pow(p + 1.0, -1.0 / p) / std::sqrt(p);
        if (ratio > sup) {
            sup = ratio;
            sup_at = p;
        }
        inf = std::min(inf, ratio);
    }
    CHECK(sup_at == 1.0);
    CHECK(sup == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
    for (const auto& c : report.per_theta) {
        CHECK(c.sup_ratio == doctest::Approx(sup).epsilon(1e-8));
        CHECK(c.sup_at == 1.0);
        CHECK(c.inf_ratio == doctest::Approx(inf).epsilon(1e-8));
        CHECK(c.endpoint_checked);
        CHECK(c.endpoint_pass);
    }
}

TEST_CASE("certify flags an injected cone-axis direction (expected failure)") {
    const int n = 200;
    auto cone = BodySpec::cone_over_cube(n);
    DirectionSet set;
    set.grid = GridD::make(n);
    auto iso = closed_form_isotropy(cone);
    REQUIRE(iso.has_value());
    set.L_K = iso->second;
    set.target_m = 1;
    set.thetas = Eigen::MatrixXd::Zero(1, n);
    set.thetas(0, n - 1) = 1.0;  // the axis

    QuadEvaluator orig(cone, false);
    auto report = certify(orig, &cone, set, true);
    CHECK_FALSE(report.all_pass);
    CHECK(report.per_theta[0].sup_ratio > 3.0);
    CHECK(report.per_theta[0].sup_at == static_cast<double>(n));
    CHECK(set.flags[0] == 0);
    // the endpoint comparison itself still holds on the axis; the failure
    // is the dimension-free two-sided bound, not the support estimate
    CHECK(report.per_theta[0].endpoint_checked);
    CHECK(report.per_theta[0].endpoint_pass);
    CHECK_FALSE(report.per_theta[0].bounds_pass);
}

TEST_CASE("evaluator growth preserves the existing sample prefix") {
    auto cube = BodySpec::cube(3);
    McEvaluator direct(cube, 400, 77, SampleMethod::Direct, {}, 2);
    Eigen::MatrixXd before = direct.batch().points;
    REQUIRE(direct.grow());
    CHECK(direct.batch().size() == 800);
    CHECK(direct.batch().points.topRows(400) == before);

    HitAndRunOptions hr;
    hr.burn_in = 100;
    hr.thinning = 2;
    McEvaluator walk(cube, 240, 78, SampleMethod::HitAndRun, hr, 2);
    Eigen::MatrixXd wbefore = walk.batch().points;
    REQUIRE(walk.grow());
    CHECK(walk.batch().points.topRows(240) == wbefore);
}

TEST_CASE("beta = 1 requests a full orthonormal basis") {
    const int n = 12;
    auto ball = BodySpec::euclidean_ball(n);
    QuadEvaluator eval(ball);
    auto grid = GridD::make(n);
    FindOptions opts;
    opts.beta = 1.0;
    opts.seed = 4;
    auto r = find_directions(eval, grid, eval.L_K(),
                             Eigen::MatrixXd::Identity(n, n), opts);
    CHECK(r.status == FindStatus::Ok);
    CHECK(r.set.count() == n);
    Eigen::MatrixXd G = r.set.thetas * r.set.thetas.transpose();
    CHECK((G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
}
