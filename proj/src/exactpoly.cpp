#include "subgauss/exactpoly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subgauss/errors.hpp"

namespace subgauss {

double cube_moment(const Eigen::VectorXd& a, int m) {
    if (m < 0) throw InvalidParam("cube_moment: m must be >= 0");
    const int n = static_cast<int>(a.size());
    // f_k = E S^k / k!; convolve the per-coordinate series
    // c_j = E (a_i U)^j / j! = (a_i/2)^j / (j+1)!   (even j).
    std::vector<double> f(m + 1, 0.0);
    f[0] = 1.0;
    std::vector<double> c(m + 1, 0.0);
    std::vector<double> g(m + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        const double half = 0.5 * a[i];
        c[0] = 1.0;
        double pw = 1.0;
        double fact = 1.0;  // (j+1)!
        for (int j = 1; j <= m; ++j) {
            pw *= half;
            fact *= (j + 1);
            c[j] = (j % 2 == 0) ? pw / fact : 0.0;
        }
        std::fill(g.begin(), g.end(), 0.0);
        for (int k = 0; k <= m; ++k) {
            double s = 0.0;
            for (int j = 0; j <= k; j += 2) s += f[k - j] * c[j];
            g[k] = s;
        }
        std::swap(f, g);
    }
    double mfact = 1.0;
    for (int j = 2; j <= m; ++j) mfact *= j;
    return f[m] * mfact;
}

double simplex_mean_power(const std::vector<double>& t, int m) {
    if (m < 0) throw InvalidParam("simplex_mean_power: m must be >= 0");
    const int d = static_cast<int>(t.size()) - 1;
    if (d < 0) throw InvalidParam("simplex_mean_power: empty vertex list");
    // complete homogeneous symmetric polynomial h_m(t_0..t_d)
    std::vector<double> h(m + 1, 0.0);
    h[0] = 1.0;
    for (double ti : t)
        for (int k = 1; k <= m; ++k) h[k] += ti * h[k - 1];
    const double factor = std::exp(std::lgamma(m + 1.0) + std::lgamma(d + 1.0) -
                                   std::lgamma(m + d + 1.0));
    return h[m] * factor;
}

double ball_abs_moment(int n, double radius, double p) {
    if (p < 0) throw InvalidParam("ball_abs_moment: p must be >= 0");
    auto lbeta = [](double x, double y) {
        return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
    };
    const double log_ratio = lbeta(0.5 * (p + 1.0), 0.5 * (n + 1.0)) -
                             lbeta(0.5, 0.5 * (n + 1.0));
    return std::pow(radius, p) * std::exp(log_ratio);
}

namespace {

std::optional<double> l1_ball_moment(const BodySpec& body,
                                     const Eigen::VectorXd& theta, int m) {
    const int n = body.dim();
    if (n > 20) return std::nullopt;
    const double r = body.radius();
    // orthant simplices conv{0, s_1 r e_1, ..., s_n r e_n}
    std::vector<double> t(n + 1);
    double acc = 0.0;
    const std::uint64_t patterns = 1ULL << n;
    for (std::uint64_t bits = 0; bits < patterns; ++bits) {
        t[0] = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sign = (bits >> i) & 1 ? -1.0 : 1.0;
            t[i + 1] = sign * r * theta[i];
        }
        acc += simplex_mean_power(t, m);
    }
    return acc / static_cast<double>(patterns);
}

std::optional<double> cone_over_cube_moment(const BodySpec& body,
                                            const Eigen::VectorXd& theta, int m) {
    const int n = body.dim();
    const int b = n - 1;
    if (b > 9 || body.cone_base().kind() != BodyKind::Cube) return std::nullopt;
    const double lam = body.cone_scale();
    const double shift = body.cone_axis_shift();
    const double apex_t = (lam * body.cone_height() - shift) * theta[n - 1];
    const double base_t = -shift * theta[n - 1];

    // Kuhn triangulation of the base cube: for each permutation, vertices
    // w_0 = corner, w_k = w_{k-1} + e_{perm[k]}; all pieces have volume 1/b!.
    std::vector<int> perm(b);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> t(n + 1);
    double acc = 0.0;
    std::int64_t count = 0;
    do {
        Eigen::VectorXd w = Eigen::VectorXd::Constant(b, -0.5);
        t[0] = lam * w.dot(theta.head(b)) + base_t;
        for (int k = 0; k < b; ++k) {
            w[perm[k]] += 1.0;
            t[k + 1] = lam * w.dot(theta.head(b)) + base_t;
        }
        t[n] = apex_t;
        acc += simplex_mean_power(t, m);
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc / static_cast<double>(count);
}

}  // namespace

std::optional<double> body_moment(const BodySpec& body,
                                  const Eigen::VectorXd& theta, int m) {
    if (theta.size() != body.dim())
        throw DimensionMismatch("body_moment: dimension mismatch");
    switch (body.kind()) {
        case BodyKind::Cube:
            return cube_moment(theta, m);
        case BodyKind::Simplex: {
            const int n = body.dim();
            const double s = body.simplex_scale();
            const double a = s / (n + 1.0);
            std::vector<double> t(n + 1);
            const double corner = -a * theta.sum();
            t[0] = corner;
            for (int i = 0; i < n; ++i) t[i + 1] = s * theta[i] + corner;
            return simplex_mean_power(t, m);
        }
        case BodyKind::EuclideanBall:
            if (m % 2 != 0) return std::nullopt;
            return ball_abs_moment(body.dim(), body.radius(), m) *
                   std::pow(theta.norm(), m);
        case BodyKind::LpBall:
            if (body.lp_exponent() != 1.0) return std::nullopt;
            return l1_ball_moment(body, theta, m);
        case BodyKind::Cone:
            return cone_over_cube_moment(body, theta, m);
        default:
            return std::nullopt;
    }
}

std::optional<double> endpoint_norm(const BodySpec& body,
                                    const Eigen::VectorXd& theta) {
    const int n = body.dim();
    if (body.kind() == BodyKind::EuclideanBall)
        return std::pow(ball_abs_moment(n, body.radius(), n), 1.0 / n) * theta.norm();
    if (n % 2 != 0) return std::nullopt;  // |.|^n == (.)^n needs even n
    auto m = body_moment(body, theta, n);
    if (!m) return std::nullopt;
    if (*m <= 0.0) return std::nullopt;  // cancellation guard
    return std::pow(*m, 1.0 / n);
}

}  // namespace subgauss
