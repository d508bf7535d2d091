#include <cmath>

#include "doctest.h"
#include "subgauss/bodies.hpp"
#include "subgauss/exactpoly.hpp"
#include "subgauss/quadrature.hpp"
#include "subgauss/rng.hpp"
#include "subgauss/sampling.hpp"

using namespace subgauss;

namespace {

Eigen::VectorXd unit(int n, int i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = 1.0;
    return e;
}

double mc_moment(const BodySpec& body, const Eigen::VectorXd& theta, int m,
                 std::uint64_t seed) {
    auto batch = sample_uniform(body, 400000, seed, SampleMethod::Direct);
    Eigen::VectorXd z = batch.points * theta;
    double acc = 0.0;
    for (std::int64_t i = 0; i < z.size(); ++i) acc += std::pow(z[i], m);
    return acc / static_cast<double>(z.size());
}

double quad_abs_moment(const MarginalDensity& md, double p) {
    return std::exp(log_abs_moment(md.log_pdf, md.lo, md.hi, p));
}

}  // namespace

TEST_CASE("cube moments: coordinate closed form and 2-d expansion oracle") {
    for (int m : {0, 2, 4, 8, 12}) {
        const double expect = std::pow(0.5, m) / (m + 1);
        CHECK(cube_moment(unit(6, 2), m) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(cube_moment(unit(3, 0), 3) == doctest::Approx(0.0));

    // independent oracle: multinomial expansion for n = 2, m = 4
    const double a1 = 0.7, a2 = -1.3;
    auto mu = [](int k) { return std::pow(0.5, k) / (k + 1); };
    const double expect4 = mu(4) * std::pow(a1, 4) + 6.0 * mu(2) * mu(2) * a1 * a1 * a2 * a2 +
                           mu(4) * std::pow(a2, 4);
    Eigen::VectorXd a(2);
    a << a1, a2;
    CHECK(cube_moment(a, 4) == doctest::Approx(expect4).epsilon(1e-12));
}

TEST_CASE("simplex_mean_power: segment oracle") {
    // mean of x^m over [t0, t1] = (t1^{m+1}-t0^{m+1})/((m+1)(t1-t0))
    const double t0 = -0.4, t1 = 1.7;
    for (int m : {1, 2, 5, 8}) {
        const double expect = (std::pow(t1, m + 1) - std::pow(t0, m + 1)) /
                              ((m + 1) * (t1 - t0));
        CHECK(simplex_mean_power({t0, t1}, m) == doctest::Approx(expect).epsilon(1e-12));
    }
    // triangle with vertices 0,0,1 projected: mean of x over it
    CHECK(simplex_mean_power({0.0, 0.0, 1.0}, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("simplex body moments match coordinate quadrature and MC") {
    const int n = 4;
    auto sim = BodySpec::simplex(n);
    auto md = *sim.marginal(unit(n, 1));
    for (int m : {2, 4, 6}) {
        const double quad = quad_abs_moment(md, m);
        CHECK(*body_moment(sim, unit(n, 1), m) == doctest::Approx(quad).epsilon(1e-9));
    }
    CounterRng rng(303, 0);
    Eigen::VectorXd theta = rng.unit_vector(n);
    CHECK(*body_moment(sim, theta, 4) ==
          doctest::Approx(mc_moment(sim, theta, 4, 7)).epsilon(0.02));
}

TEST_CASE("l1 ball moments: triangulation vs closed-form marginal") {
    const int n = 5;
    auto l1 = BodySpec::lp_ball(n, 1.0);
    auto md = *l1.marginal(unit(n, 0));
    for (int m : {2, 4, 8}) {
        const double quad = quad_abs_moment(md, m);
        CHECK(*body_moment(l1, unit(n, 0), m) == doctest::Approx(quad).epsilon(1e-9));
    }
    CounterRng rng(304, 0);
    Eigen::VectorXd theta = rng.unit_vector(n);
    CHECK(*body_moment(l1, theta, 4) ==
          doctest::Approx(mc_moment(l1, theta, 4, 8)).epsilon(0.02));
}

TEST_CASE("cone moments: triangulation vs axis quadrature and MC") {
    const int n = 5;
    auto cone = BodySpec::cone_over_cube(n);
    auto axis = *cone.marginal(unit(n, n - 1));
    for (int m : {2, 4}) {
        const double quad = quad_abs_moment(axis, m);
        CHECK(*body_moment(cone, unit(n, n - 1), m) ==
              doctest::Approx(quad).epsilon(1e-9));
    }
    auto base = *cone.marginal(unit(n, 0));
    CHECK(*body_moment(cone, unit(n, 0), 4) ==
          doctest::Approx(quad_abs_moment(base, 4)).epsilon(1e-9));

    CounterRng rng(305, 0);
    Eigen::VectorXd theta = rng.unit_vector(n);
    CHECK(*body_moment(cone, theta, 4) ==
          doctest::Approx(mc_moment(cone, theta, 4, 9)).epsilon(0.02));
}

TEST_CASE("ball radial moments match quadrature") {
    const int n = 6;
    auto ball = BodySpec::euclidean_ball(n);
    CounterRng rng(306, 0);
    auto md = *ball.marginal(rng.unit_vector(n));
    for (double p : {1.0, 2.0, 5.5, 6.0}) {
        CHECK(ball_abs_moment(n, ball.radius(), p) ==
              doctest::Approx(quad_abs_moment(md, p)).epsilon(1e-9));
    }
}

TEST_CASE("endpoint norm: cube coordinate case") {
    // n = 4: ||<X,e1>||_4 = (1/80)^{1/4} / ... = (2^{-4}/5)^{1/4}
    auto cube = BodySpec::cube(4);
    const double expect = std::pow(std::pow(0.5, 4) / 5.0, 0.25);
    CHECK(*endpoint_norm(cube, unit(4, 0)) == doctest::Approx(expect).epsilon(1e-12));
    // odd dimension at generic direction: unsupported
    auto cube3 = BodySpec::cube(3);
    CounterRng rng(307, 0);
    CHECK_FALSE(endpoint_norm(cube3, rng.unit_vector(3)).has_value());
    // ball path works at odd n
    auto ball = BodySpec::euclidean_ball(5);
    CHECK(endpoint_norm(ball, rng.unit_vector(5)).has_value());
}
