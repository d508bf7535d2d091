#include <cmath>

#include "doctest.h"
#include "subgauss/quadrature.hpp"

using namespace subgauss;

TEST_CASE("adaptive integration of smooth functions") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
          doctest::Approx(2.0).epsilon(1e-12));
    // peaked integrand needs the adaptive splits
    const double v = integrate(
        [](double x) { return std::exp(-500.0 * (x - 0.3) * (x - 0.3)); }, 0.0, 1.0);
    CHECK(v == doctest::Approx(std::sqrt(M_PI / 500.0)).epsilon(1e-9));
}

TEST_CASE("log-space moments avoid overflow at large p") {
    // standard normal: E|X|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi)
    auto lognorm = [](double t) {
        return -0.5 * t * t - 0.5 * std::log(2.0 * M_PI);
    };
    for (double p : {1.0, 2.0, 8.0, 64.0, 200.0}) {
        const double expect =
            (0.5 * p) * std::log(2.0) + std::lgamma(0.5 * (p + 1.0)) -
            0.5 * std::log(M_PI);
        const double got = log_abs_moment(lognorm, -60.0, 60.0, p);
        CHECK(got == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("lp norm of uniform density matches closed form") {
    auto logu = [](double) { return 0.0; };  // uniform on [-1/2, 1/2]
    for (double p : {1.0, 2.0, 4.0, 8.0}) {
        const double expect = 0.5 * std::pow(p + 1.0, -1.0 / p);
        CHECK(lp_norm_from_density(logu, -0.5, 0.5, p) ==
              doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("normal tail helper") {
    CHECK(normal_upper_tail(0.0) == doctest::Approx(0.5));
    CHECK(normal_upper_tail(1.959963985) == doctest::Approx(0.025).epsilon(1e-6));
}

TEST_CASE("digamma") {
    // psi(1) = -euler_gamma, psi(2) = 1 - euler_gamma
    const double eg = 0.5772156649015329;
    CHECK(digamma(1.0) == doctest::Approx(-eg).epsilon(1e-10));
    CHECK(digamma(2.0) == doctest::Approx(1.0 - eg).epsilon(1e-10));
    CHECK(digamma(0.5) == doctest::Approx(-eg - 2.0 * std::log(2.0)).epsilon(1e-10));
    // recurrence psi(x+1) = psi(x) + 1/x
    CHECK(digamma(5.25) + 1.0 / 5.25 == doctest::Approx(digamma(6.25)).epsilon(1e-12));
}
